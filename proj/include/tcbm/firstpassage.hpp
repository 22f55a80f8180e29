#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tcbm/fft.hpp"
#include "tcbm/interp.hpp"
#include "tcbm/timechange.hpp"

namespace tcbm {

inline constexpr double kDefaultFftEps = 1e-10;
inline constexpr double kMinUBar = 300.0;
inline constexpr std::size_t kMinLattice = std::size_t{1} << 8;
inline constexpr std::size_t kMaxLattice = std::size_t{1} << 14;

// u-lattice u(k) = -u_bar + k eta and reciprocal x-lattice x(l) = l eta_star,
// with eta * eta_star = 2 pi / n.
struct FftGrid {
  std::size_t n = 0;
  double eta = 0.0;

  static FftGrid from_truncation(std::size_t n, double u_bar);

  double u_bar() const noexcept { return 0.5 * static_cast<double>(n) * eta; }
  double eta_star() const noexcept;
  double x_max() const noexcept { return static_cast<double>(n) * eta_star(); }
  double u(std::size_t k) const noexcept { return -u_bar() + static_cast<double>(k) * eta; }
  double x(std::size_t l) const noexcept { return static_cast<double>(l) * eta_star(); }
  // Grid for parameters rescaled by lambda: x-lattice stretched by lambda.
  FftGrid rescaled(double lambda) const noexcept { return {n, eta / lambda}; }
  void validate() const;

  friend bool operator==(const FftGrid&, const FftGrid&) = default;
};

// Sizes the lattice for horizon t so that truncation and aliasing errors of
// the survival transform stay below eps for starting points up to params.x.
// Requires beta < 0.
FftGrid choose_grid(const TimeChangeSpec& spec, const TcbmParams& params, double t,
                    double eps = kDefaultFftEps);

// Largest x whose lattice value is free of aliasing at level eps and whose
// amplified rounding error stays below the clamping tolerance.
double valid_extent(const FftGrid& grid, double beta, double eps = kDefaultFftEps);

// P2(t, x) on the valid part of the x-lattice with exact first and second
// x-derivatives. Off the lattice it is interpolated by quintic Hermite, or by
// a slope-limited cubic in cells where the quintic would not be monotone.
class SurvivalCurve {
 public:
  SurvivalCurve() = default;
  SurvivalCurve(double t, FftGrid grid, std::vector<double> values, std::vector<double> slopes,
                std::vector<double> curvatures);

  double horizon() const noexcept { return t_; }
  const FftGrid& grid() const noexcept { return grid_; }
  double step() const noexcept { return grid_.eta_star(); }
  std::size_t nodes() const noexcept { return values_.size(); }
  double x_valid() const noexcept { return step() * static_cast<double>(nodes() - 1); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> slopes() const noexcept { return slopes_; }
  std::span<const double> curvatures() const noexcept { return curvatures_; }

  double value_at(double x) const;
  double slope_at(double x) const;

 private:
  void check_range(double x) const;

  double t_ = 0.0;
  FftGrid grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  std::vector<double> curvatures_;
  std::vector<double> limited_;  // Fritsch-Carlson slopes for fallback cells
  std::vector<char> quintic_ok_;
};

// E_x[X_t^j ; no default] for j = 0, 1, 2.
struct KilledMoments {
  double h0 = 0.0;
  double h1 = 0.0;
  double h2 = 0.0;
};

struct MomentPair {
  double g1 = 0.0;
  double g2 = 0.0;
};

// Density of X_t given no default, on the valid y-lattice.
struct ConditionalDensity {
  FftGrid grid;
  double start = 0.0;
  double survival = 0.0;
  std::vector<double> values;  // values[l] at y = l * eta_star

  double step() const noexcept { return grid.eta_star(); }
  // End-corrected trapezoid rule; the density has a nonzero slope at the barrier.
  double integral() const;
};

class TransitionKernel;

// Caches psi(sigma^2 (u_k^2 + beta^2) / 2, 1) over the u-lattice for one
// (spec, sigma, beta, grid); psi(., t) follows by time homogeneity.
class LatticeEngine {
 public:
  LatticeEngine(const TimeChangeSpec& spec, const TcbmParams& params, const FftGrid& grid,
                double eps = kDefaultFftEps);

  const TimeChangeSpec& spec() const noexcept { return spec_; }
  const TcbmParams& params() const noexcept { return params_; }
  const FftGrid& grid() const noexcept { return grid_; }
  double eps() const noexcept { return eps_; }
  double x_valid() const noexcept { return x_valid_; }

  SurvivalCurve survival(double t) const;
  std::vector<SurvivalCurve> survival_batch(std::span<const double> horizons) const;
  // Reference path: same kernel, one horizon at a time on the calling thread.
  std::vector<SurvivalCurve> survival_batch_serial(std::span<const double> horizons) const;

  // Direct summation over the u-lattice at a single x.
  double survival_direct(double t, double x) const;

  ConditionalDensity conditional_density(double t, double x) const;
  TransitionKernel transition(double t) const;

 private:
  friend class TransitionKernel;
  std::vector<double> decay(double t) const;

  TimeChangeSpec spec_;
  TcbmParams params_;
  FftGrid grid_;
  double eps_;
  double x_valid_;
  Fft fft_;
  std::vector<double> psi1_;  // psi(sigma^2 (u_k^2 + beta^2) / 2, 1)
};

// Half-lattice sums for a fixed horizon: survival and the first two killed
// moments at any single starting point. Requires beta < 0 for the moments.
class TransitionKernel {
 public:
  TransitionKernel(const LatticeEngine& engine, double t);

  double horizon() const noexcept { return t_; }
  double survival(double x) const;
  KilledMoments killed_moments(double x) const;
  MomentPair conditional_moments(double x) const;

 private:
  double t_;
  double beta_;
  double eta_;
  std::vector<double> w0_;  // 2 u E / (u^2 + beta^2), j = 1 .. n/2 - 1, then u_bar (weight 1)
  std::vector<double> w1_;
  std::vector<double> w2_;
};

SurvivalCurve survival_lattice(const TimeChangeSpec& spec, const TcbmParams& params, double t,
                               const FftGrid& grid);
double survival_at(const SurvivalCurve& curve, double x);
// Convenience: sizes a grid for x with the default tolerance.
double survival_at(const TimeChangeSpec& spec, const TcbmParams& params, double t, double x);
ConditionalDensity conditional_density(const TimeChangeSpec& spec, const TcbmParams& params,
                                       double t, double x, const FftGrid& grid);
MomentPair conditional_moments(const TimeChangeSpec& spec, const TcbmParams& params, double dt,
                               double x);

}  // namespace tcbm
