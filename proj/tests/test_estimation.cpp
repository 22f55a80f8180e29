#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "tcbm/errors.hpp"
#include "tcbm/estimation.hpp"
#include "tcbm/optimizer.hpp"
#include "tcbm/simulate.hpp"

using namespace tcbm;

namespace {

const std::vector<ZeroCurve> kCurves{ZeroCurve::flat(0.03)};

SimulatedPanel synthetic(std::size_t weeks, std::uint64_t seed, Theta theta = {}) {
  ModelConfig cfg;
  SimulationSpec sim;
  sim.weeks = weeks;
  sim.seed = seed;
  return simulate_panel(cfg, theta, kCurves, sim);
}

// The same quotes with every bid/ask width multiplied by s.
CdsPanel scale_widths(const CdsPanel& p, double s) {
  CdsPanel out = p;
  for (std::size_t t = 0; t < p.size(); ++t)
    for (std::size_t k = 0; k < p.tenor_count(); ++k) {
      if (!p.has(t, k)) continue;
      const double m = p.mid_at(t, k), h = 0.5 * s * p.width_at(t, k);
      out.set(t, k, m - h, m, m + h);
    }
  return out;
}

}  // namespace

TEST(Optimizer, QuadraticWithActiveBound) {
  // Unconstrained maximum at (0.3, 2.5); the box cuts the second coordinate at 1.
  const Objective f = [](std::span<const double> x) {
    const double a = x[0] - 0.3, b = x[1] - 2.5;
    return -(4.0 * a * a + a * b + b * b);
  };
  const Box box{{-1.0, -1.0}, {1.0, 1.0}};
  const OptimizerResult r = maximize_in_box(f, {-0.8, 0.0}, box);
  ASSERT_TRUE(r.converged) << r.message;
  // With x1 = 1 the first coordinate solves 8 a + b = 0.
  EXPECT_NEAR(r.x[1], 1.0, 0.0);
  EXPECT_NEAR(r.x[0], 0.3 + 1.5 / 8.0, 1e-5);
  EXPECT_FALSE(r.trace.empty());
}

TEST(Optimizer, Rosenbrock) {
  const Objective f = [](std::span<const double> x) {
    return -(100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2));
  };
  OptimizerOptions opt;
  opt.max_evaluations = 4000;
  opt.gradient_tol = 1e-8;
  const OptimizerResult r = maximize_in_box(f, {-1.2, 1.0}, Box{{-3, -3}, {3, 3}}, opt);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(Optimizer, InfeasiblePointsAreAvoided) {
  const Objective f = [](std::span<const double> x) {
    if (x[0] > 0.5) throw NumericError("outside");
    return -(x[0] - 2.0) * (x[0] - 2.0);
  };
  const OptimizerResult r = maximize_in_box(f, {0.0}, Box{{-1.0}, {1.0}});
  EXPECT_LE(r.x[0], 0.5);
  EXPECT_GT(r.x[0], 0.45);
}

TEST(Optimizer, NumericGradient) {
  const Objective f = [](std::span<const double> x) { return std::sin(x[0]) * std::exp(x[1]); };
  const Box box{{-2.0, -2.0}, {2.0, 1.0}};
  int evals = 0;
  const std::vector<double> x{0.4, -0.3};
  auto g = numeric_gradient(f, x, f(x), box, 1e-5, evals);
  EXPECT_NEAR(g[0], std::cos(0.4) * std::exp(-0.3), 1e-9);
  EXPECT_NEAR(g[1], std::sin(0.4) * std::exp(-0.3), 1e-9);
  EXPECT_EQ(evals, 4);
  // At the upper bound the difference is one-sided and stays in the box.
  const std::vector<double> edge{0.4, 1.0};
  const Objective guarded = [&](std::span<const double> x) {
    if (x[1] > 1.0) throw NumericError("left the box");
    return f(x);
  };
  g = numeric_gradient(guarded, edge, f(edge), box, 1e-5, evals);
  EXPECT_NEAR(g[1], std::sin(0.4) * std::exp(1.0), 1e-4);
}

TEST(Optimizer, BoxValidation) {
  EXPECT_THROW((Box{{1.0}, {0.0}}).validate(), DomainError);
  EXPECT_THROW((Box{{0.0, 0.0}, {1.0}}).validate(), DomainError);
  const Box b{{0.0, -1.0}, {1.0, 1.0}};
  const auto p = b.project({2.0, -3.0});
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -1.0);
}

TEST(Vuong, IdenticalSeriesGiveZero) {
  std::vector<double> a(52);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::sin(0.3 * i);
  const VuongReport r = vuong_test(a, a);
  EXPECT_EQ(r.lambda, 0.0);
  EXPECT_EQ(r.statistic, 0.0);
}

TEST(Vuong, Antisymmetric) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(78), b(78);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = n(rng);
    b[i] = n(rng) + 0.2;
  }
  const VuongReport ab = vuong_test(a, b), ba = vuong_test(b, a);
  EXPECT_NEAR(ab.statistic, -ba.statistic, 1e-14);
  EXPECT_NEAR(ab.lambda, -ba.lambda, 1e-12);
  EXPECT_NEAR(ab.s_hat, ba.s_hat, 1e-14);
}

TEST(Vuong, NeweyWestByHand) {
  EXPECT_EQ(newey_west_lag(78), 3u);
  EXPECT_EQ(newey_west_lag(100), 4u);
  EXPECT_EQ(newey_west_lag(20), 2u);
  // d = (1, -1, 1, -1): gamma0 = 1, gamma1 = -3/4, lag 1 weight 1/2.
  const std::vector<double> d{1, -1, 1, -1};
  EXPECT_NEAR(newey_west_variance(d, 0), 1.0, 1e-15);
  EXPECT_NEAR(newey_west_variance(d, 1), 1.0 - 0.75, 1e-15);
}

TEST(Vuong, Guards) {
  std::vector<double> a(19, 1.0), b(19, 0.0);
  EXPECT_THROW(vuong_test(a, b), DomainError);
  std::vector<double> c(30, 1.0), d(31, 0.0);
  EXPECT_THROW(vuong_test(c, d), DomainError);
  std::vector<double> e(30, 1.0), f(30, 0.5);
  EXPECT_THROW(vuong_test(e, f), NumericError);
}

TEST(Vuong, SizeUnderIidNull) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  int rejections = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> a(78), b(78, 0.0);
    for (double& v : a) v = n(rng);
    if (std::abs(vuong_test(a, b).statistic) > 1.959964) ++rejections;
  }
  EXPECT_LE(rejections, 14);  // 7% of 200
}

TEST(Estimation, KalmanWeeklyTermsSumToFilter) {
  const auto sp = synthetic(40, 3);
  ModelConfig cfg;
  const Theta th{1.1, -1.7, 0.55, 1.3};
  const auto l = weekly_loglik_kalman(sp.panel, kCurves, cfg, th);
  ASSERT_EQ(l.size(), sp.panel.size());
  double sum = 0.0;
  for (double v : l) sum += v;
  const double total = run_filter(sp.panel, kCurves, cfg, th, FilterMode::kalman).loglik;
  EXPECT_NEAR(sum, total, 1e-8 * std::abs(total));
}

TEST(Estimation, SingleTenorSingleDateIsJacobian) {
  // One quote and a diffuse start: the likelihood is -log|dF/dx| whatever eta.
  const auto sp = synthetic(1, 8);
  CdsPanel p({sp.panel.dates[0]}, {5.0});
  const std::size_t k5 = 4;
  p.set(0, 0, sp.panel.bid[k5], sp.panel.mid[k5], sp.panel.ask[k5]);
  ModelConfig cfg;
  for (double eta : {0.5, 1.5, 4.0}) {
    Theta th;
    th.eta = eta;
    const MeasurementModel model(cfg, th, kCurves, p.tenors);
    const auto m = model.measure(p, 0);
    const double expected = std::log(m.w_tilde[0] / m.width[0]);
    EXPECT_NEAR(log_likelihood(p, kCurves, cfg, th, FilterMode::kalman), expected, 1e-10);
  }
}

TEST(Estimation, WidthScalingAlgebra) {
  // Doubling every width on a single date: -K log 2 + log 2 + (3/8) Q.
  const auto sp = synthetic(1, 9);
  ModelConfig cfg;
  const Theta th;
  const CdsPanel p = sp.panel;
  const CdsPanel p2 = scale_widths(p, 2.0);
  const MeasurementModel model(cfg, th, kCurves, p.tenors);
  const auto m = model.measure(p, 0);
  double tau = 0.0, sx = 0.0;
  for (std::size_t k = 0; k < m.x_tilde.size(); ++k) {
    const double s2 = std::pow(th.eta * m.w_tilde[k], 2);
    tau += 1.0 / s2;
    sx += m.x_tilde[k] / s2;
  }
  const double xhat = sx / tau;
  double q = 0.0;
  for (std::size_t k = 0; k < m.x_tilde.size(); ++k)
    q += std::pow(m.x_tilde[k] - xhat, 2) / std::pow(th.eta * m.w_tilde[k], 2);
  const double K = static_cast<double>(m.valid_count());
  const double diff = log_likelihood(p2, kCurves, cfg, th, FilterMode::kalman) -
                      log_likelihood(p, kCurves, cfg, th, FilterMode::kalman);
  EXPECT_NEAR(diff, -K * std::log(2.0) + std::log(2.0) + 0.375 * q, 1e-9);
}

TEST(Estimation, RmseAgainstQuadratureSpreads) {
  // 2 x 2 panel built from spreads computed independently by quadrature.
  ModelConfig cfg;
  Theta th;
  const TimeChangeSpec spec = cfg.time_change(th.c);
  const std::vector<double> x{0.6, 0.9};
  const std::vector<double> tenors{2.0, 5.0};
  CdsPanel p({"2006-03-01", "2006-03-08"}, tenors);
  const double errors[2][2] = {{0.5, -1.0}, {2.0, 0.0}};
  const double width = 0.002;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t k = 0; k < 2; ++k) {
      const double f = oracle::quadrature_cds_spread(
          spec, cfg.sigma, th.beta_q, [](double u) { return std::exp(-0.03 * u); }, tenors[k],
          cfg.premium_dt, th.recovery, x[t]);
      const double mid = f - errors[t][k] * width;
      p.set(t, k, mid - width / 2, mid, mid + width / 2);
    }
  EXPECT_NEAR(rmse(p, kCurves, cfg, th, x), std::sqrt((0.25 + 1.0 + 4.0 + 0.0) / 4.0), 1e-5);
  // A missing cell is left out.
  p.set(1, 0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
        std::numeric_limits<double>::quiet_NaN());
  EXPECT_NEAR(rmse(p, kCurves, cfg, th, x), std::sqrt(1.25 / 3.0), 1e-5);
}

TEST(Estimation, RmseOfConstantUnitError) {
  const auto sp = synthetic(10, 4);
  ModelConfig cfg;
  Theta th;
  const MeasurementModel model(cfg, th, kCurves, sp.panel.tenors);
  CdsPanel p = sp.panel;
  for (std::size_t t = 0; t < p.size(); ++t)
    for (std::size_t k = 0; k < p.tenor_count(); ++k) {
      if (!p.has(t, k)) continue;
      const double w = p.width_at(t, k);
      const double mid = model.spread(t, k, sp.x_true[t]) + w;
      p.set(t, k, mid - w / 2, mid, mid + w / 2);
    }
  EXPECT_NEAR(rmse(p, kCurves, cfg, th, sp.x_true), 1.0, 1e-12);
  EXPECT_THROW(rmse(p, kCurves, cfg, th, std::vector<double>(3, 0.5)), DomainError);
}

TEST(Estimation, SummarizePath) {
  const std::vector<double> x{1.0, 1.1, 0.9, std::numeric_limits<double>::quiet_NaN(), 1.0};
  const PathSummary s = summarize_path(x);
  EXPECT_NEAR(s.x_av, 1.0, 1e-15);
  // Increments over the finite entries: 0.1, -0.2, 0.1.
  EXPECT_NEAR(s.x_std, std::sqrt((0.01 + 0.04 + 0.01) / 3.0 * 52.0), 1e-12);
  EXPECT_THROW(summarize_path(std::vector<double>{}), DomainError);
}

TEST(Estimation, DefaultStartsStayInBounds) {
  const ThetaBounds b;
  const auto starts = default_starts(Theta{9.0, -4.0, 0.9, 15.0}, b);
  ASSERT_EQ(starts.size(), 3u);
  for (const auto& s : starts) EXPECT_TRUE(b.contains(s));
  EXPECT_EQ(free_parameters(ModelConfig{}).size(), 4u);
  ModelConfig bc;
  bc.kind = TimeChangeKind::brownian;
  EXPECT_EQ(free_parameters(bc), (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Estimation, LikelihoodProfilePeaksNearTruth) {
  const auto sp = synthetic(52, 12);
  ModelConfig cfg;
  const Theta truth;
  const double at_truth = log_likelihood(sp.panel, kCurves, cfg, truth);
  for (double r : {0.3, 0.8}) {
    Theta off = truth;
    off.recovery = r;
    EXPECT_LT(log_likelihood(sp.panel, kCurves, cfg, off), at_truth) << r;
  }
  for (double eta : {0.5, 4.0}) {
    Theta off = truth;
    off.eta = eta;
    EXPECT_LT(log_likelihood(sp.panel, kCurves, cfg, off), at_truth) << eta;
  }
}

TEST(Estimation, RecoversParametersAndNestsBlackCox) {
  const auto sp = synthetic(78, 42);
  ModelConfig cfg;
  const Theta truth;
  EstimationOptions opt;
  opt.starts = {truth};
  const EstimationResult vg = maximize_likelihood(sp.panel, kCurves, cfg, truth, opt);
  ASSERT_TRUE(vg.converged);
  ASSERT_EQ(vg.stderr_.size(), 4u);
  const auto t = to_array(truth), e = to_array(vg.theta_hat);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(std::isfinite(vg.stderr_[i]));
    EXPECT_LT(std::abs(e[i] - t[i]), 3.0 * vg.stderr_[i]) << kThetaNames[i];
  }
  EXPECT_GE(vg.loglik, log_likelihood(sp.panel, kCurves, cfg, truth));
  EXPECT_EQ(vg.x_path.size(), sp.panel.size());

  ModelConfig bc = cfg;
  bc.kind = TimeChangeKind::brownian;
  const EstimationResult black_cox = maximize_likelihood(sp.panel, kCurves, bc, truth, opt);
  EXPECT_EQ(black_cox.estimate.size(), 3u);
  EXPECT_EQ(black_cox.theta_hat.c, truth.c);
  EXPECT_LT(black_cox.loglik, vg.loglik);
  EXPECT_GT(black_cox.rmse, vg.rmse);
}

TEST(Simulate, NoiselessQuotesInvertToTruePath) {
  Theta th;
  th.eta = 0.0;
  const auto sp = synthetic(12, 21, th);
  ModelConfig cfg;
  const MeasurementModel model(cfg, th, kCurves, sp.panel.tenors);
  for (std::size_t t = 0; t < sp.panel.size(); ++t) {
    const auto m = model.measure(sp.panel, t);
    for (std::size_t k = 0; k < m.x_tilde.size(); ++k) {
      if (!m.valid[k]) continue;
      EXPECT_NEAR(m.x_tilde[k], sp.x_true[t], 1e-8) << t << " " << k;
    }
  }
}

TEST(Simulate, IncrementsMatchKilledMoments) {
  ModelConfig cfg;
  const TimeChangeSpec spec = cfg.time_change(1.0);
  const double dt = 1.0 / 52.0, x = 0.4;
  const TransitionSampler sampler(spec, cfg.physical(), dt);
  const auto from = sampler.prepare(x);
  Rng rng(77);
  const int n = 100000;
  int alive = 0;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto y = sampler.draw(from, rng);
    if (!y) continue;
    ++alive;
    s1 += *y;
    s2 += *y * *y;
    s4 += std::pow(*y, 4);
  }
  const double g0 = oracle::killed_moment(spec, cfg.sigma, cfg.beta, dt, x, 0);
  const double g1 = oracle::killed_moment(spec, cfg.sigma, cfg.beta, dt, x, 1) / g0;
  const double g2 = oracle::killed_moment(spec, cfg.sigma, cfg.beta, dt, x, 2) / g0;
  const double p = static_cast<double>(alive) / n;
  EXPECT_NEAR(p, g0, 3.0 * std::sqrt(g0 * (1.0 - g0) / n) + 1e-12);
  const double mean = s1 / alive, second = s2 / alive;
  const double var = g2 - g1 * g1;
  EXPECT_NEAR(mean, g1, 3.0 * std::sqrt(var / alive));
  EXPECT_NEAR(second, g2, 3.0 * std::sqrt((s4 / alive - second * second) / alive));
}

TEST(Simulate, DefaultFrequencyNearBarrier) {
  ModelConfig cfg;
  const TimeChangeSpec spec = cfg.time_change(1.0);
  const double dt = 1.0 / 52.0, x = 0.05;
  const TransitionSampler sampler(spec, cfg.physical(), dt);
  const auto from = sampler.prepare(x);
  Rng rng(99);
  const int n = 1000000;
  int defaults = 0;
  for (int i = 0; i < n; ++i)
    if (!sampler.draw(from, rng)) ++defaults;
  const double pd = 1.0 - oracle::quadrature_survival(spec, cfg.sigma, cfg.beta, dt, x);
  EXPECT_NEAR(static_cast<double>(defaults) / n, pd, 3.0 * std::sqrt(pd * (1.0 - pd) / n));
}

TEST(Simulate, ReproducibleAndShaped) {
  const auto a = synthetic(20, 5), b = synthetic(20, 5), c = synthetic(20, 6);
  EXPECT_EQ(a.panel.mid, b.panel.mid);
  EXPECT_NE(a.panel.mid, c.panel.mid);
  EXPECT_EQ(a.panel.size(), 20u);
  EXPECT_EQ(a.x_true.size(), 20u);
  EXPECT_NO_THROW(a.panel.validate());
  for (std::size_t t = 0; t < a.panel.size(); ++t)
    for (std::size_t k = 0; k < a.panel.tenor_count(); ++k) {
      if (!a.panel.has(t, k)) continue;
      const double w = a.panel.width_at(t, k);
      EXPECT_GE(w, 5e-4 - 1e-15);
    }
  // A separate noise stream keeps the path.
  SimulationSpec sim;
  sim.weeks = 20;
  sim.seed = 5;
  sim.noise_seed = 1;
  const auto d = simulate_panel(ModelConfig{}, Theta{}, kCurves, sim);
  sim.noise_seed = 2;
  const auto e = simulate_panel(ModelConfig{}, Theta{}, kCurves, sim);
  EXPECT_EQ(d.x_true, e.x_true);
  EXPECT_NE(d.panel.mid, e.panel.mid);
  EXPECT_NEAR(year_fraction(days_from_iso(a.panel.dates[0]), days_from_iso(a.panel.dates[1])),
              1.0 / 52.0, 1e-15);
}
