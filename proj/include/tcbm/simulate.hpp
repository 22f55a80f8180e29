#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcbm/filter.hpp"

namespace tcbm {

// Bid/ask width as a function of the true par spread: a relative part with a
// floor, both in decimals.
struct WidthProfile {
  double floor = 5e-4;
  double relative = 0.04;

  double width(double spread) const;
};

struct SimulationSpec {
  std::size_t weeks = 78;
  std::vector<double> tenors{1, 2, 3, 4, 5, 7, 10};
  double x0 = 0.7;
  std::string start_date = "2005-01-05";
  WidthProfile widths;
  std::uint64_t seed = 42;
  // Separate stream for the quote noise; the path then depends on seed alone.
  std::optional<std::uint64_t> noise_seed;
};

struct SimulatedPanel {
  CdsPanel panel;
  std::vector<double> x_true;  // one per retained date
  bool defaulted = false;      // panel truncated at the default week
};

// Inverse-CDF draws from a lattice density, linear between nodes.
class DensitySampler {
 public:
  explicit DensitySampler(const ConditionalDensity& density);
  double operator()(Rng& rng) const;

 private:
  double step_;
  std::vector<double> values_;
  std::vector<double> cumulative_;
};

double sample_conditional(const ConditionalDensity& density, Rng& rng);

// One-step transition draws under the physical measure.
class TransitionSampler {
 public:
  TransitionSampler(const TimeChangeSpec& spec, const TcbmParams& params_p, double dt,
                    double eps = kDefaultFftEps);

  double step() const noexcept { return dt_; }
  ConditionalDensity density(double x) const { return engine_->conditional_density(dt_, x); }
  double survival(double x) const { return engine_->survival_direct(dt_, x); }

  // Everything needed to step from one fixed x.
  struct From {
    double survival = 0.0;
    DensitySampler next;
  };
  From prepare(double x) const;
  // Next state, or nothing if the firm defaults during the step.
  std::optional<double> draw(const From& from, Rng& rng) const;
  std::optional<double> draw(double x, Rng& rng) const;

 private:
  double dt_;
  std::unique_ptr<LatticeEngine> engine_;
};

SimulatedPanel simulate_panel(const ModelConfig& config, const Theta& theta,
                              std::span<const ZeroCurve> curves, const SimulationSpec& sim);

}  // namespace tcbm
