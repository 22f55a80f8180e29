#include "tcbm/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)
constexpr double kFitHalfWidth = 4.0;
// Transition sums are sized for starting points up to this log-leverage.
constexpr double kTransitionXRange = 5.0;
constexpr double kMinSlope = 1e-14;

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * d * d / var;
}

}  // namespace

TimeChangeSpec ModelConfig::time_change(double c) const {
  switch (kind) {
    case TimeChangeKind::variance_gamma:
      return TimeChangeSpec::variance_gamma(b, c);
    case TimeChangeKind::exponential:
      return TimeChangeSpec::exponential(b, c);
    case TimeChangeKind::brownian:
      return TimeChangeSpec::brownian(b);
  }
  throw DomainError("unknown time change kind");
}

std::size_t MeasurementVector::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), char{1}));
}

GaussianFusion fuse(const MeasurementVector& meas, double eta) {
  if (!(eta > 0.0)) throw DomainError("measurement error scale must be positive");
  double tau = 0.0, weighted = 0.0, log_const = 0.0;
  for (std::size_t k = 0; k < meas.valid.size(); ++k) {
    if (!meas.valid[k]) continue;
    const double s = eta * meas.w_tilde[k];
    tau += 1.0 / (s * s);
    weighted += meas.x_tilde[k] / (s * s);
    log_const -= 0.5 * kLog2Pi + std::log(eta * meas.width[k]);
  }
  if (!(tau > 0.0)) throw DataError("measurement update: no valid tenor on this date");
  const double mean = weighted / tau;
  double q = 0.0;
  for (std::size_t k = 0; k < meas.valid.size(); ++k) {
    if (!meas.valid[k]) continue;
    const double s = eta * meas.w_tilde[k];
    const double d = meas.x_tilde[k] - mean;
    q += d * d / (s * s);
  }
  log_const += 0.5 * (kLog2Pi - std::log(tau)) - 0.5 * q;
  return {mean, tau, log_const};
}

// ---------------------------------------------------------------------------

FilterState FilterState::start(FilterMode mode) {
  FilterState s;
  s.mode = mode;
  return s;
}

NormalKernel FilterState::kernel() const {
  if (diffuse) throw DomainError("diffuse filter state has no kernel");
  return {mean, std::sqrt(var)};
}

double FilterState::posterior_mean() const {
  if (diffuse) return std::numeric_limits<double>::quiet_NaN();
  return mode == FilterMode::truncated ? truncated_moments(kernel()).mean : mean;
}

double FilterState::posterior_sd() const {
  if (diffuse) return std::numeric_limits<double>::quiet_NaN();
  return mode == FilterMode::truncated ? std::sqrt(truncated_moments(kernel()).var)
                                       : std::sqrt(var);
}

double FilterState::posterior_mode() const {
  if (diffuse) return std::numeric_limits<double>::quiet_NaN();
  return std::max(mean, 0.0);
}

FilterState measurement_update(const FilterState& state, const MeasurementVector& meas,
                               double eta) {
  if (meas.valid_count() == 0) throw DataError("measurement update: all tenors invalid");
  const GaussianFusion g = fuse(meas, eta);
  const bool trunc = state.mode == FilterMode::truncated;
  FilterState out = state;
  out.diffuse = false;
  if (state.diffuse) {
    // Flat prior on (0, inf) or on the whole line.
    out.mean = g.mean;
    out.var = 1.0 / g.precision;
    out.loglik += g.log_const;
    if (trunc) out.loglik += log_norm_cdf(g.mean * std::sqrt(g.precision));
    return out;
  }
  if (!(state.var > 0.0)) throw DomainError("measurement update: prior variance must be positive");
  const double prior_prec = 1.0 / state.var;
  const double var = 1.0 / (g.precision + prior_prec);
  const double mean = var * (g.precision * g.mean + prior_prec * state.mean);
  double log_mass = g.log_const + log_normal_pdf(g.mean, state.mean, state.var + 1.0 / g.precision);
  if (trunc) {
    log_mass += log_norm_cdf(mean / std::sqrt(var)) -
                log_norm_cdf(state.mean / std::sqrt(state.var));
  }
  out.mean = mean;
  out.var = var;
  out.loglik += log_mass;
  return out;
}

// ---------------------------------------------------------------------------

Prediction predict_step(const FilterState& state, const TransitionKernel& kernel) {
  const NormalKernel k = state.kernel();
  const bool trunc = state.mode == FilterMode::truncated;
  double centre = k.mu, spread = k.sd;
  if (trunc) {
    const TruncatedMoments tm = truncated_moments(k);
    centre = tm.mean;
    spread = std::sqrt(tm.var);
  }
  const double lo = std::max(0.0, centre - kFitHalfWidth * spread);
  const double hi = centre + kFitHalfWidth * spread;
  if (!(hi > lo)) throw NumericError("predict: degenerate fit interval");

  const auto nodes = QuarticFit::nodes(lo, hi);
  std::array<double, 5> v0{}, v1{}, v2{};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const KilledMoments m = kernel.killed_moments(nodes[i]);
    v0[i] = m.h0;
    v1[i] = m.h1;
    v2[i] = m.h2;
  }
  const double lower = trunc ? 0.0 : -std::numeric_limits<double>::infinity();
  const double e0 = QuarticFit::through(lo, hi, v0).expectation(k, lower);
  const double e1 = QuarticFit::through(lo, hi, v1).expectation(k, lower);
  const double e2 = QuarticFit::through(lo, hi, v2).expectation(k, lower);
  if (!(e0 > 0.0)) throw NumericError("predict: survival mass is not positive");

  Prediction p;
  p.m0 = e0;
  p.m1 = e1 / e0;
  p.m2 = e2 / e0;
  if (!(p.m2 - p.m1 * p.m1 > 0.0)) throw NumericError("predict: predictive variance is not positive");
  const NormalKernel next =
      trunc ? match_truncated_moments(p.m1, p.m2) : NormalKernel{p.m1, std::sqrt(p.m2 - p.m1 * p.m1)};
  p.state = state;
  p.state.mean = next.mu;
  p.state.var = next.sd * next.sd;
  p.state.loglik += std::log(p.m0);
  return p;
}

Prediction predict_step(const FilterState& state, const TimeChangeSpec& spec,
                        const TcbmParams& params_p, double dt) {
  if (!(dt > 0.0)) throw DomainError("predict: step must be positive");
  TcbmParams p = params_p;
  p.x = kTransitionXRange;
  const LatticeEngine engine(spec, p, choose_grid(spec, p, dt));
  return predict_step(state, TransitionKernel(engine, dt));
}

// ---------------------------------------------------------------------------

MeasurementModel::MeasurementModel(const ModelConfig& config, const Theta& theta,
                                   std::span<const ZeroCurve> curves,
                                   std::span<const double> tenors, bool parallel)
    : config_(config),
      theta_(theta),
      curves_(curves.begin(), curves.end()),
      tenors_(tenors.begin(), tenors.end()) {
  if (curves_.empty()) throw DomainError("measurement model needs at least one zero curve");
  if (tenors_.empty()) throw DomainError("measurement model needs at least one tenor");
  std::size_t count = 0;
  for (double tenor : tenors_) {
    const CdsContractSpec c{tenor, config.premium_dt, theta.recovery};
    count = std::max(count, c.periods());
  }
  const TimeChangeSpec spec = config.time_change(theta.c);
  const TcbmParams q = config.risk_neutral(theta.beta_q);
  const FftGrid grid =
      SurvivalSet::default_grid(spec, q, config.premium_dt, config.x_range, config.eps);
  survival_ = std::make_shared<SurvivalSet>(spec, q, config.premium_dt, count, grid, parallel,
                                            config.eps);
}

const ZeroCurve& MeasurementModel::curve(std::size_t t) const {
  if (curves_.size() == 1) return curves_[0];
  if (t >= curves_.size()) throw DomainError("measurement model: no zero curve for this date");
  return curves_[t];
}

CdsPricer MeasurementModel::pricer(std::size_t t, std::size_t k) const {
  if (k >= tenors_.size()) throw DomainError("measurement model: tenor index out of range");
  return CdsPricer(survival_, curve(t),
                   CdsContractSpec{tenors_[k], config_.premium_dt, theta_.recovery});
}

MeasurementVector MeasurementModel::measure(const CdsPanel& panel, std::size_t t) const {
  const std::size_t K = tenors_.size();
  if (panel.tenor_count() != K) throw DomainError("measurement model: tenor count mismatch");
  MeasurementVector m;
  m.t = t;
  m.x_tilde.assign(K, std::numeric_limits<double>::quiet_NaN());
  m.w_tilde.assign(K, std::numeric_limits<double>::quiet_NaN());
  m.width.assign(K, std::numeric_limits<double>::quiet_NaN());
  m.valid.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (!panel.has(t, k)) continue;
    const double width = panel.width_at(t, k);
    if (!(width > 0.0)) continue;
    const CdsPricer p = pricer(t, k);
    double x = 0.0;
    try {
      x = p.invert(panel.mid_at(t, k));
    } catch (const RangeError&) {
      continue;
    }
    const double f = std::abs(p.slope(x));
    if (!(f > kMinSlope) || !std::isfinite(f)) continue;
    m.x_tilde[k] = x;
    m.width[k] = width;
    m.w_tilde[k] = width / f;
    m.valid[k] = 1;
  }
  return m;
}

// ---------------------------------------------------------------------------

TransitionCache::TransitionCache(const TimeChangeSpec& spec, const TcbmParams& params_p,
                                 double eps)
    : spec_(spec), params_(params_p), eps_(eps) {
  params_.x = kTransitionXRange;
}

const TransitionKernel& TransitionCache::at(double dt) {
  if (!(dt > 0.0)) throw DomainError("transition step must be positive");
  const long key = std::lround(dt * 1e9);
  auto it = kernels_.find(key);
  if (it != kernels_.end()) return *it->second;
  const LatticeEngine engine(spec_, params_, choose_grid(spec_, params_, dt, eps_), eps_);
  auto kernel = std::make_unique<TransitionKernel>(engine, dt);
  return *kernels_.emplace(key, std::move(kernel)).first->second;
}

// ---------------------------------------------------------------------------

FilterResult run_filter(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                        const ModelConfig& config, const Theta& theta, FilterMode mode) {
  panel.validate();
  const std::size_t M = panel.size();
  if (M == 0) throw DataError("run_filter: empty panel");
  if (curves.size() != 1 && curves.size() != M)
    throw DomainError("run_filter: need one zero curve per date or a single curve");
  for (std::size_t t = 0; t < M; ++t) {
    if (!panel.survived[t])
      throw DataError("run_filter: default recorded on " + panel.dates[t] +
                      "; the likelihood conditions on survival");
  }

  const MeasurementModel model(config, theta, curves, panel.tenors);
  TransitionCache cache(config.time_change(theta.c), config.physical(), config.eps);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  FilterResult r;
  r.posterior.resize(M);
  r.x_mode.assign(M, nan);
  r.x_mean.assign(M, nan);
  r.x_sd.assign(M, nan);
  r.step_loglik.assign(M, 0.0);
  r.measurements.resize(M);

  FilterState state = FilterState::start(mode);
  int last_day = 0;
  bool started = false;
  for (std::size_t t = 0; t < M; ++t) {
    MeasurementVector meas = model.measure(panel, t);
    const std::size_t valid = meas.valid_count();
    if (valid < panel.tenor_count()) {
      if (valid == 0) {
        r.warnings.push_back(panel.dates[t] + ": no tenor could be inverted; date skipped");
        r.skipped.push_back(t);
        r.measurements[t] = std::move(meas);
        continue;
      }
      r.warnings.push_back(panel.dates[t] + ": " + std::to_string(panel.tenor_count() - valid) +
                           " tenor(s) masked");
    }
    const double before = state.loglik;
    const int day = days_from_iso(panel.dates[t]);
    if (started) state = predict_step(state, cache.at(year_fraction(last_day, day))).state;
    state = measurement_update(state, meas, theta.eta);
    started = true;
    last_day = day;

    r.step_loglik[t] = state.loglik - before;
    r.posterior[t] = state;
    r.x_mode[t] = state.posterior_mode();
    r.x_mean[t] = state.posterior_mean();
    r.x_sd[t] = state.posterior_sd();
    r.measurements[t] = std::move(meas);
  }
  if (!started) throw DataError("run_filter: no date has a usable quote");
  r.loglik = state.loglik;
  return r;
}

double naive_measurement_loglik(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                const ModelConfig& config, const Theta& theta,
                                std::span<const double> x_path) {
  if (x_path.size() != panel.size()) throw DomainError("naive likelihood: path length mismatch");
  if (!(theta.eta > 0.0)) throw DomainError("measurement error scale must be positive");
  const MeasurementModel model(config, theta, curves, panel.tenors);
  double total = 0.0;
  for (std::size_t t = 0; t < panel.size(); ++t) {
    if (!std::isfinite(x_path[t])) continue;
    for (std::size_t k = 0; k < panel.tenor_count(); ++k) {
      if (!panel.has(t, k)) continue;
      const double s = theta.eta * panel.width_at(t, k);
      total += log_normal_pdf(panel.mid_at(t, k), model.spread(t, k, x_path[t]), s * s);
    }
  }
  return total;
}

}  // namespace tcbm
