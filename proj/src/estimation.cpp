#include "tcbm/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;

std::vector<double> free_vector(const Theta& t, const std::vector<std::size_t>& free) {
  const auto a = to_array(t);
  std::vector<double> v;
  for (std::size_t i : free) v.push_back(a[i]);
  return v;
}

Theta with_free(const Theta& base, const std::vector<std::size_t>& free, std::span<const double> v) {
  auto a = to_array(base);
  for (std::size_t k = 0; k < free.size(); ++k) a[free[k]] = v[k];
  return from_array(a);
}

Box free_box(const ThetaBounds& b, const std::vector<std::size_t>& free) {
  return {free_vector(b.lower, free), free_vector(b.upper, free)};
}

// Standard errors from the information matrix; empty when not positive definite.
std::vector<double> standard_errors(const Eigen::MatrixXd& info) {
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) return {};
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  std::vector<double> se(info.rows());
  for (Eigen::Index i = 0; i < info.rows(); ++i) {
    if (!(cov(i, i) > 0.0)) return {};
    se[i] = std::sqrt(cov(i, i));
  }
  return se;
}

}  // namespace

std::array<double, 4> to_array(const Theta& t) { return {t.c, t.beta_q, t.recovery, t.eta}; }

Theta from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

void ThetaBounds::validate() const {
  const auto lo = to_array(lower), hi = to_array(upper);
  for (std::size_t i = 0; i < 4; ++i)
    if (!(lo[i] < hi[i])) throw DomainError(std::string("bounds: lower must be below upper for ") + kThetaNames[i]);
  if (!(lower.c > 0.0)) throw DomainError("bounds: c must stay positive");
  if (!(upper.beta_q < 0.0)) throw DomainError("bounds: beta_q must stay negative");
  if (!(lower.recovery >= 0.0 && upper.recovery < 1.0)) throw DomainError("bounds: recovery must lie in [0, 1)");
  if (!(lower.eta > 0.0)) throw DomainError("bounds: eta must stay positive");
}

bool ThetaBounds::contains(const Theta& t) const {
  const auto v = to_array(t), lo = to_array(lower), hi = to_array(upper);
  for (std::size_t i = 0; i < 4; ++i)
    if (!(v[i] >= lo[i] && v[i] <= hi[i])) return false;
  return true;
}

std::vector<Theta> default_starts(const Theta& init, const ThetaBounds& bounds) {
  auto clip = [&](Theta t) {
    auto v = to_array(t);
    const auto lo = to_array(bounds.lower), hi = to_array(bounds.upper);
    for (std::size_t i = 0; i < 4; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
    return from_array(v);
  };
  return {clip(init),
          clip({init.c * 0.5, init.beta_q * 0.6, init.recovery - 0.25, init.eta * 1.6}),
          clip({init.c * 2.5, init.beta_q * 1.5, init.recovery + 0.2, init.eta * 0.6})};
}

PathSummary summarize_path(std::span<const double> x, double periods_per_year) {
  std::vector<double> v;
  for (double xi : x)
    if (std::isfinite(xi)) v.push_back(xi);
  if (v.empty()) throw DomainError("path summary: no finite values");
  PathSummary s;
  for (double xi : v) s.x_av += xi;
  s.x_av /= static_cast<double>(v.size());
  if (v.size() < 2) return s;
  double qv = 0.0;
  for (std::size_t t = 1; t < v.size(); ++t) qv += (v[t] - v[t - 1]) * (v[t] - v[t - 1]);
  s.x_std = std::sqrt(qv / static_cast<double>(v.size() - 1) * periods_per_year);
  return s;
}

std::vector<std::size_t> free_parameters(const ModelConfig& config) {
  if (config.kind == TimeChangeKind::brownian) return {1, 2, 3};
  return {0, 1, 2, 3};
}

double log_likelihood(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                      const ModelConfig& config, const Theta& theta, FilterMode mode) {
  return run_filter(panel, curves, config, theta, mode).loglik;
}

Eigen::MatrixXd observed_information(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                     const ModelConfig& config, const Theta& theta,
                                     FilterMode mode, double rel, int* evaluations) {
  const auto free = free_parameters(config);
  const std::size_t n = free.size();
  const std::vector<double> x = free_vector(theta, free);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = rel * std::max(std::abs(x[i]), 1.0);

  // Stencil: centre, +-h_i, and the four corners of every pair.
  std::vector<std::vector<double>> points{x};
  auto shifted = [&](std::size_t i, double si, std::size_t j, double sj) {
    std::vector<double> p = x;
    p[i] += si * h[i];
    if (j < n) p[j] += sj * h[j];
    return p;
  };
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back(shifted(i, 1, n, 0));
    points.push_back(shifted(i, -1, n, 0));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) points.push_back(shifted(i, si, j, sj));
    }
  }
  const Objective f = [&](std::span<const double> v) {
    return log_likelihood(panel, curves, config, with_free(theta, free, v), mode);
  };
  int evals = 0;
  const std::vector<double> val = evaluate_batch(f, points, evals);
  if (evaluations) *evaluations += evals;
  for (double v : val)
    if (!std::isfinite(v)) throw NumericError("information matrix: likelihood fails next to the estimate");

  Eigen::MatrixXd info(n, n);
  const double f0 = val[0];
  for (std::size_t i = 0; i < n; ++i)
    info(i, i) = -(val[1 + 2 * i] - 2.0 * f0 + val[2 + 2 * i]) / (h[i] * h[i]);
  std::size_t k = 1 + 2 * n;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double pp = val[k], pm = val[k + 1], mp = val[k + 2], mm = val[k + 3];
      k += 4;
      info(i, j) = info(j, i) = -(pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
    }
  }
  return info;
}

EstimationResult maximize_likelihood(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                     const ModelConfig& config, const Theta& init,
                                     const EstimationOptions& options) {
  options.bounds.validate();
  if (!options.bounds.contains(init)) throw DomainError("initial parameters lie outside the search region");
  const auto free = free_parameters(config);
  const Box box = free_box(options.bounds, free);
  const std::vector<Theta> starts =
      options.starts.empty() ? default_starts(init, options.bounds) : options.starts;

  EstimationResult r;
  for (std::size_t i : free) r.names.emplace_back(kThetaNames[i]);

  std::vector<OptimizerResult> runs;
  for (const Theta& s : starts) {
    const Objective f = [&, s](std::span<const double> v) {
      return log_likelihood(panel, curves, config, with_free(s, free, v), options.mode);
    };
    StartOutcome out;
    out.start = s;
    try {
      OptimizerResult o = maximize_in_box(f, free_vector(s, free), box, options.optimizer);
      out.end = with_free(s, free, o.x);
      out.loglik = o.value;
      out.converged = o.converged;
      out.evaluations = o.evaluations;
      out.message = o.message;
      r.evaluations += o.evaluations;
      runs.push_back(std::move(o));
    } catch (const NumericError& e) {
      out.end = s;
      out.loglik = -std::numeric_limits<double>::infinity();
      out.message = e.what();
      runs.emplace_back();
      runs.back().value = out.loglik;
    }
    r.starts.push_back(out);
  }

  std::size_t best = r.starts.size();
  for (std::size_t i = 0; i < r.starts.size(); ++i) {
    if (!r.starts[i].converged) continue;
    if (best == r.starts.size() || r.starts[i].loglik > r.starts[best].loglik) best = i;
  }
  if (best == r.starts.size())
    throw NumericError("estimation did not converge from any start within " +
                       std::to_string(options.optimizer.max_evaluations) + " evaluations");
  r.converged = true;
  r.theta_hat = r.starts[best].end;
  r.loglik = r.starts[best].loglik;
  r.iterations = runs[best].iterations;
  r.trace = runs[best].trace;
  r.estimate = free_vector(r.theta_hat, free);
  for (std::size_t i = 0; i < r.starts.size(); ++i) {
    if (i != best && r.starts[i].converged && r.starts[i].loglik < r.loglik - 1e-3 * std::max(1.0, std::abs(r.loglik)))
      r.warnings.push_back("start " + std::to_string(i + 1) + " ended at a lower local maximum");
  }

  try {
    r.fisher = observed_information(panel, curves, config, r.theta_hat, options.mode,
                                    options.hessian_step, &r.evaluations);
    r.stderr_ = standard_errors(r.fisher);
    if (r.stderr_.empty()) {
      r.hessian_reliable = false;
      r.warnings.push_back("information matrix is not positive definite; standard errors unavailable");
    } else {
      const auto half = standard_errors(observed_information(
          panel, curves, config, r.theta_hat, options.mode, 0.5 * options.hessian_step, &r.evaluations));
      bool stable = !half.empty();
      for (std::size_t i = 0; stable && i < half.size(); ++i)
        stable = std::abs(half[i] / r.stderr_[i] - 1.0) < options.hessian_check;
      if (!stable)
        r.warnings.push_back("standard errors change by more than " +
                             std::to_string(static_cast<int>(100 * options.hessian_check)) +
                             "% when the Hessian step is halved");
    }
  } catch (const NumericError& e) {
    r.hessian_reliable = false;
    r.warnings.push_back(e.what());
  }
  if (r.stderr_.empty()) r.stderr_.assign(free.size(), std::numeric_limits<double>::quiet_NaN());

  const FilterResult fr = run_filter(panel, curves, config, r.theta_hat, options.mode);
  r.x_path = fr.x_mode;
  r.x_sd = fr.x_sd;
  r.path = summarize_path(r.x_path);
  r.rmse = rmse(panel, curves, config, r.theta_hat, r.x_path);
  return r;
}

double rmse(const CdsPanel& panel, std::span<const ZeroCurve> curves, const ModelConfig& config,
            const Theta& theta, std::span<const double> x_path) {
  if (x_path.size() != panel.size()) throw DomainError("rmse: path length mismatch");
  const MeasurementModel model(config, theta, curves, panel.tenors);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < panel.size(); ++t) {
    if (!std::isfinite(x_path[t])) continue;
    for (std::size_t k = 0; k < panel.tenor_count(); ++k) {
      if (!panel.has(t, k)) continue;
      const double w = panel.width_at(t, k);
      if (!(w > 0.0)) throw DataError("rmse: zero bid/ask width on " + panel.dates[t]);
      const double e = (model.spread(t, k, x_path[t]) - panel.mid_at(t, k)) / w;
      sum += e * e;
      ++count;
    }
  }
  if (count == 0) throw DataError("rmse: no quoted cells");
  return std::sqrt(sum / static_cast<double>(count));
}

std::vector<double> weekly_loglik_kalman(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                         const ModelConfig& config, const Theta& theta) {
  panel.validate();
  const std::size_t M = panel.size();
  const MeasurementModel model(config, theta, curves, panel.tenors);
  TransitionCache cache(config.time_change(theta.c), config.physical(), config.eps);
  std::vector<double> l(M, 0.0);
  FilterState state = FilterState::start(FilterMode::kalman);
  int last_day = 0;
  for (std::size_t t = 0; t < M; ++t) {
    const MeasurementVector meas = model.measure(panel, t);
    if (meas.valid_count() == 0) continue;
    const int day = days_from_iso(panel.dates[t]);
    std::vector<double> x, s2, log_f;
    for (std::size_t k = 0; k < meas.valid.size(); ++k) {
      if (!meas.valid[k]) continue;
      x.push_back(meas.x_tilde[k]);
      s2.push_back(std::pow(theta.eta * meas.w_tilde[k], 2));
      log_f.push_back(std::log(meas.width[k] / meas.w_tilde[k]));
    }
    const std::size_t K = x.size();
    double jacobian = 0.0;
    for (double lf : log_f) jacobian += lf;
    if (state.diffuse) {
      l[t] = fuse(meas, theta.eta).log_const;
    } else {
      const Prediction pr = predict_step(state, cache.at(year_fraction(last_day, day)));
      state = pr.state;
      const double xbar = state.mean;
      Eigen::MatrixXd P = Eigen::MatrixXd::Constant(K, K, state.var);
      Eigen::VectorXd e(K);
      for (std::size_t k = 0; k < K; ++k) {
        P(k, k) += s2[k];
        e(k) = x[k] - xbar;
      }
      Eigen::LLT<Eigen::MatrixXd> llt(P);
      if (llt.info() != Eigen::Success) throw NumericError("Kalman forecast covariance is singular");
      const Eigen::MatrixXd L = llt.matrixL();
      double log_det = 0.0;
      for (std::size_t k = 0; k < K; ++k) log_det += 2.0 * std::log(L(k, k));
      const double quad = e.dot(llt.solve(e));
      l[t] = -0.5 * (static_cast<double>(K) * kLog2Pi + log_det + quad) - jacobian + std::log(pr.m0);
    }
    state = measurement_update(state, meas, theta.eta);
    last_day = day;
  }
  return l;
}

}  // namespace tcbm
