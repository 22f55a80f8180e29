#include "tcbm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kSimulationXRange = 5.0;
constexpr int kWeekDays = 7;

}  // namespace

double WidthProfile::width(double spread) const {
  return std::max(floor, relative * std::abs(spread));
}

DensitySampler::DensitySampler(const ConditionalDensity& density)
    : step_(density.step()), values_(density.values), cumulative_(values_.size(), 0.0) {
  if (values_.size() < 2) throw NumericError("sampling: density lattice too short");
  for (std::size_t l = 1; l < values_.size(); ++l)
    cumulative_[l] = cumulative_[l - 1] + 0.5 * step_ * (values_[l - 1] + values_[l]);
  if (!(cumulative_.back() > 0.0)) throw NumericError("sampling: density has no mass");
}

double DensitySampler::operator()(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double target = unif(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t l = std::clamp<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), 1, values_.size() - 1);
  // Solve d0 s + (d1 - d0) s^2 / (2h) = r within the cell.
  const double h = step_;
  const double r = target - cumulative_[l - 1];
  const double d0 = values_[l - 1];
  const double slope = (values_[l] - d0) / h;
  double s;
  if (slope == 0.0) {
    s = d0 > 0.0 ? r / d0 : 0.5 * h;
  } else {
    const double disc = std::max(d0 * d0 + 2.0 * slope * r, 0.0);
    const double denom = d0 + std::sqrt(disc);
    s = denom > 0.0 ? 2.0 * r / denom : 0.5 * h;
  }
  s = std::clamp(s, 0.0, h);
  return h * static_cast<double>(l - 1) + s;
}

double sample_conditional(const ConditionalDensity& density, Rng& rng) {
  return DensitySampler(density)(rng);
}

TransitionSampler::TransitionSampler(const TimeChangeSpec& spec, const TcbmParams& params_p,
                                     double dt, double eps)
    : dt_(dt) {
  if (!(dt > 0.0)) throw DomainError("transition sampler: step must be positive");
  TcbmParams p = params_p;
  p.x = kSimulationXRange;
  engine_ = std::make_unique<LatticeEngine>(spec, p, choose_grid(spec, p, dt, eps), eps);
}

TransitionSampler::From TransitionSampler::prepare(double x) const {
  if (!(x > 0.0)) throw DomainError("transition sampler: start must be positive");
  const ConditionalDensity d = density(x);
  return {d.survival, DensitySampler(d)};
}

std::optional<double> TransitionSampler::draw(const From& from, Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) >= from.survival) return std::nullopt;
  return from.next(rng);
}

std::optional<double> TransitionSampler::draw(double x, Rng& rng) const {
  if (!(x > 0.0)) return std::nullopt;
  if (!(survival(x) > 1e-12)) return std::nullopt;
  return draw(prepare(x), rng);
}

SimulatedPanel simulate_panel(const ModelConfig& config, const Theta& theta,
                              std::span<const ZeroCurve> curves, const SimulationSpec& sim) {
  if (sim.weeks == 0) throw DomainError("simulate: need at least one week");
  if (sim.tenors.empty()) throw DomainError("simulate: need at least one tenor");
  if (!(sim.x0 > 0.0)) throw DomainError("simulate: starting log-leverage must be positive");
  if (!(theta.eta >= 0.0)) throw DomainError("simulate: noise scale must be nonnegative");
  if (curves.size() != 1 && curves.size() != sim.weeks)
    throw DomainError("simulate: need one zero curve per week or a single curve");

  Rng rng(sim.seed);
  Rng noise_rng(sim.noise_seed.value_or(0));
  Rng& noise = sim.noise_seed ? noise_rng : rng;
  std::normal_distribution<double> normal(0.0, 1.0);
  const TimeChangeSpec spec = config.time_change(theta.c);
  const TransitionSampler sampler(spec, config.physical(), 1.0 / 52.0, config.eps);
  const MeasurementModel model(config, theta, curves, sim.tenors);

  // Path first, so the noise draws do not depend on the default week.
  std::vector<double> path{sim.x0};
  bool defaulted = false;
  while (path.size() < sim.weeks) {
    const auto next = sampler.draw(path.back(), rng);
    if (!next) {
      defaulted = true;
      break;
    }
    path.push_back(*next);
  }

  const int start = days_from_iso(sim.start_date);
  std::vector<std::string> dates;
  for (std::size_t t = 0; t < path.size(); ++t)
    dates.push_back(iso_from_days(start + kWeekDays * static_cast<int>(t)));

  SimulatedPanel out;
  out.panel = CdsPanel(std::move(dates), sim.tenors);
  out.x_true = path;
  out.defaulted = defaulted;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t t = 0; t < path.size(); ++t) {
    for (std::size_t k = 0; k < sim.tenors.size(); ++k) {
      const double z = normal(noise);
      double fair = nan;
      try {
        fair = model.spread(t, k, path[t]);
      } catch (const RangeError&) {
        continue;  // beyond the pricing lattice: no quote
      }
      const double w = sim.widths.width(fair);
      const double mid = fair + theta.eta * w * z;
      if (!(mid - 0.5 * w > 0.0)) continue;
      out.panel.set(t, k, mid - 0.5 * w, mid, mid + 0.5 * w);
    }
  }
  return out;
}

}  // namespace tcbm
