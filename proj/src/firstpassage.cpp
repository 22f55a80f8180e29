#include "tcbm/firstpassage.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClampTol = 1e-8;
constexpr double kResidueTol = 1e-6;
// Trapezoid error of the lattice density reaches a few 1e-3 when x is within a
// few lattice steps of the barrier; larger gaps mean the lattice is too small.
constexpr double kNormalizationTol = 1e-2;
// Bound on the absolute rounding error of one lattice transform.
constexpr double kFftRounding = 64.0 * std::numeric_limits<double>::epsilon();
// Rotation recurrence for sin(j eta x) is re-anchored this often.
constexpr std::size_t kResync = 64;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

FftGrid FftGrid::from_truncation(std::size_t n, double u_bar) {
  FftGrid g{n, 2.0 * u_bar / static_cast<double>(n)};
  g.validate();
  return g;
}

double FftGrid::eta_star() const noexcept { return 2.0 * kPi / (static_cast<double>(n) * eta); }

void FftGrid::validate() const {
  if (!is_pow2(n) || n < 8) throw DomainError("FFT lattice size must be a power of two >= 8");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("FFT u-spacing must be positive");
}

FftGrid choose_grid(const TimeChangeSpec& spec, const TcbmParams& params, double t, double eps) {
  params.validate();
  if (!(eps > 1e-14 && eps < 1e-4)) throw DomainError("choose_grid: eps must lie in (1e-14, 1e-4)");
  if (!(t > 0.0)) throw DomainError("choose_grid: horizon must be positive");
  if (!(params.beta < 0.0))
    throw DomainError("choose_grid: discretization bound needs beta < 0; supply a grid explicitly");

  const double s2 = params.sigma * params.sigma;
  auto envelope = [&](double u) {
    return std::exp(-laplace_exponent(spec, 0.5 * s2 * u * u, t)) / u;
  };
  double u_bar = kMinUBar;
  if (envelope(u_bar) > eps) {
    double lo = u_bar;
    double hi = 2.0 * u_bar;
    while (envelope(hi) > eps) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e8) throw NumericError("choose_grid: integrand envelope does not decay");
    }
    for (int i = 0; i < 60 && hi - lo > 1e-6 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (envelope(mid) > eps ? lo : hi) = mid;
    }
    u_bar = hi;
  }

  // Aliasing from the nearest image is about exp(-|beta| (x_max - 2x)).
  const double x_needed = std::log(1.0 / eps) / std::abs(params.beta) + 2.0 * params.x;
  const double n_needed = u_bar * x_needed / kPi;
  std::size_t n = kMinLattice;
  while (static_cast<double>(n) < n_needed) {
    n <<= 1;
    if (n > kMaxLattice)
      throw NumericError("choose_grid: no lattice size up to 2^14 meets the discretization bound");
  }
  return FftGrid::from_truncation(n, u_bar);
}

double valid_extent(const FftGrid& grid, double beta, double eps) {
  const double half = 0.5 * grid.x_max();
  if (beta >= 0.0) return half;
  const double alias_free = half - std::log(1.0 / eps) / (2.0 * std::abs(beta));
  // The factor e^{-beta x} also amplifies FFT rounding; stop before it
  // reaches the clamping tolerance.
  const double rounding = std::log(kClampTol / kFftRounding) / std::abs(beta);
  return std::min(alias_free, rounding);
}

// ---------------------------------------------------------------------------

SurvivalCurve::SurvivalCurve(double t, FftGrid grid, std::vector<double> values,
                             std::vector<double> slopes, std::vector<double> curvatures)
    : t_(t),
      grid_(grid),
      values_(std::move(values)),
      slopes_(std::move(slopes)),
      curvatures_(std::move(curvatures)),
      limited_(slopes_) {
  if (values_.size() < 2 || slopes_.size() != values_.size() ||
      curvatures_.size() != values_.size())
    throw DomainError("survival curve needs at least two nodes with matching derivatives");
  limit_monotone_slopes(values_, limited_, step());
  quintic_ok_ = quintic_monotone_cells(values_, slopes_, curvatures_, step());
}

void SurvivalCurve::check_range(double x) const {
  if (!(x >= 0.0) || x > x_valid() * (1.0 + 1e-14))
    throw RangeError("survival_at: x outside the valid lattice range", 0.0, x_valid());
}

double SurvivalCurve::value_at(double x) const {
  check_range(x);
  const auto q = QuinticWeights::at(x, step(), nodes());
  const std::size_t i = q.cell;
  const double v = quintic_ok_[i] ? q.value(values_, slopes_, curvatures_)
                                  : HermiteWeights::at(x, step(), nodes()).value(values_, limited_);
  return std::clamp(v, values_[i], values_[i + 1]);
}

double SurvivalCurve::slope_at(double x) const {
  check_range(x);
  const auto q = QuinticWeights::at(x, step(), nodes());
  if (quintic_ok_[q.cell]) return q.slope(values_, slopes_, curvatures_);
  return HermiteWeights::at(x, step(), nodes()).slope(values_, limited_);
}

double ConditionalDensity::integral() const {
  // Gregory end weights 3/8, 7/6, 23/24 make the trapezoid rule fourth order.
  static constexpr double kEnd[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  const std::size_t n = values.size();
  if (n < 7) {
    double s = 0.0;
    for (std::size_t l = 0; l + 1 < n; ++l) s += 0.5 * (values[l] + values[l + 1]);
    return s * step();
  }
  double s = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double w = 1.0;
    if (l < 3) w = kEnd[l];
    else if (n - 1 - l < 3) w = kEnd[n - 1 - l];
    s += w * values[l];
  }
  return s * step();
}

// ---------------------------------------------------------------------------

LatticeEngine::LatticeEngine(const TimeChangeSpec& spec, const TcbmParams& params,
                             const FftGrid& grid, double eps)
    : spec_(spec), params_(params), grid_(grid), eps_(eps), fft_(grid.n) {
  params.validate();
  grid.validate();
  x_valid_ = valid_extent(grid, params.beta, eps);
  if (x_valid_ < 2.0 * grid.eta_star())
    throw NumericError("lattice too small: no alias-free x range at the requested tolerance");
  const double s2 = params.sigma * params.sigma;
  const double b2 = params.beta * params.beta;
  psi1_.resize(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double u = grid.u(k);
    psi1_[k] = spec.unit_exponent(0.5 * s2 * (u * u + b2));
  }
}

std::vector<double> LatticeEngine::decay(double t) const {
  if (!(t > 0.0)) throw DomainError("horizon must be positive");
  std::vector<double> e(grid_.n);
  for (std::size_t k = 0; k < grid_.n; ++k) e[k] = std::exp(-t * psi1_[k]);
  return e;
}

SurvivalCurve LatticeEngine::survival(double t) const {
  const std::size_t n = grid_.n;
  const double beta = params_.beta;
  const double b2 = beta * beta;
  const double eta = grid_.eta;
  const double step = grid_.eta_star();
  const auto e = decay(t);

  // P2 = e^{-beta x} J / pi with J = sum a sin(u x); the x-derivatives of J
  // come from b = u a (cosine sum) and c = u^2 a (sine sum).
  std::vector<std::complex<double>> a(n), b(n), c(n), sa(n), sb(n), sc(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = grid_.u(k);
    const double d = u * u + b2;
    // u = 0 with beta = 0 is a removable singularity.
    const double q = d > 0.0 ? e[k] / d : 0.0;
    a[k] = u * q;
    b[k] = d > 0.0 ? u * u * q : e[k];
    c[k] = u * u * u * q;
  }
  fft_.backward(a, sa);
  fft_.backward(b, sb);
  fft_.backward(c, sc);

  // Without exponential damping (beta >= 0) the aliasing error is algebraic,
  // so range and monotonicity are enforced without the sizing checks.
  const double tol = beta < 0.0 ? kClampTol : std::numeric_limits<double>::infinity();
  const std::size_t nodes = static_cast<std::size_t>(std::floor(x_valid_ / step)) + 1;
  std::vector<double> values(nodes), slopes(nodes), curv(nodes);
  for (std::size_t l = 0; l < nodes; ++l) {
    const double x = step * static_cast<double>(l);
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    const double pre = std::exp(-beta * x) / kPi;
    double j0 = eta * sign * sa[l].imag();
    // With beta = 0 the node u = 0 carries the limit x E of u sin(u x) / u^2.
    if (b2 == 0.0) j0 += eta * x * e[n / 2];
    const double j1 = eta * sign * sb[l].real();
    const double j2 = -eta * sign * sc[l].imag();
    const double residue = pre * eta * sign * sa[l].real();
    if (std::abs(residue) > kResidueTol)
      throw NumericError("survival transform has a large imaginary residue; lattice mis-sized");
    double p = pre * j0;
    double dp = pre * (j1 - beta * j0);
    double d2p = pre * (j2 - 2.0 * beta * j1 + b2 * j0);
    if (beta > 0.0) {
      const double img = std::exp(-2.0 * beta * x);
      p += 1.0 - img;
      dp += 2.0 * beta * img;
      d2p -= 4.0 * b2 * img;
    }
    if (p < -tol || p > 1.0 + tol)
      throw NumericError("survival probability outside [0, 1] beyond clamping tolerance");
    values[l] = std::clamp(p, 0.0, 1.0);
    slopes[l] = dp;
    curv[l] = d2p;
  }
  for (std::size_t l = 1; l < nodes; ++l) {
    if (values[l] < values[l - 1]) {
      if (values[l - 1] - values[l] > tol)
        throw NumericError("survival curve not monotone in x; lattice mis-sized");
      values[l] = values[l - 1];
    }
  }
  return {t, grid_, std::move(values), std::move(slopes), std::move(curv)};
}

std::vector<SurvivalCurve> LatticeEngine::survival_batch(std::span<const double> horizons) const {
  std::vector<SurvivalCurve> out(horizons.size());
  const long count = static_cast<long>(horizons.size());
  // Exceptions must not escape the parallel region.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = survival(horizons[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(tcbm_survival_batch)
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<SurvivalCurve> LatticeEngine::survival_batch_serial(std::span<const double> horizons) const {
  std::vector<SurvivalCurve> out;
  out.reserve(horizons.size());
  for (double t : horizons) out.push_back(survival(t));
  return out;
}

double LatticeEngine::survival_direct(double t, double x) const {
  if (!(x >= 0.0)) throw DomainError("survival_direct: x must be nonnegative");
  const double beta = params_.beta;
  const double b2 = beta * beta;
  double sum = 0.0;
  for (std::size_t k = 0; k < grid_.n; ++k) {
    const double u = grid_.u(k);
    const double d = u * u + b2;
    if (d > 0.0) sum += u * std::sin(u * x) / d * std::exp(-t * psi1_[k]);
    else sum += x * std::exp(-t * psi1_[k]);
  }
  double p = std::exp(-beta * x) * grid_.eta * sum / kPi;
  if (beta > 0.0) p += 1.0 - std::exp(-2.0 * beta * x);
  return p;
}

ConditionalDensity LatticeEngine::conditional_density(double t, double x) const {
  if (!(x >= 0.0)) throw DomainError("conditional_density: start must be nonnegative");
  const double p = survival_direct(t, x);
  if (!(p > 1e-12)) throw DomainError("conditional_density: survival probability too small");
  const std::size_t n = grid_.n;
  const double beta = params_.beta;
  const double step = grid_.eta_star();
  const auto e = decay(t);

  std::vector<std::complex<double>> c(n), back(n), fwd(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = e[k] * std::polar(1.0, -grid_.u(k) * x);
  fft_.backward(c, back);
  fft_.forward(c, fwd);

  const std::size_t nodes = static_cast<std::size_t>(std::floor(x_valid_ / step)) + 1;
  ConditionalDensity out{grid_, x, p, std::vector<double>(nodes, 0.0)};
  const double scale = grid_.eta / (2.0 * kPi * p);
  for (std::size_t l = 1; l < nodes; ++l) {
    const double y = step * static_cast<double>(l);
    const double sign = (l % 2 == 0) ? 1.0 : -1.0;
    const double v = std::exp(beta * (y - x)) * scale * sign * (back[l] - fwd[l]).real();
    out.values[l] = std::max(v, 0.0);
  }
  if (std::abs(out.integral() - 1.0) > kNormalizationTol)
    throw NumericError("conditional density does not normalize; lattice too small ");
  return out;
}

TransitionKernel LatticeEngine::transition(double t) const { return TransitionKernel(*this, t); }

// ---------------------------------------------------------------------------

TransitionKernel::TransitionKernel(const LatticeEngine& engine, double t)
    : t_(t), beta_(engine.params().beta), eta_(engine.grid().eta) {
  if (!(t > 0.0)) throw DomainError("transition horizon must be positive");
  const FftGrid& g = engine.grid();
  const std::size_t half = g.n / 2;
  const double b2 = beta_ * beta_;
  w0_.resize(half);
  w1_.resize(half);
  w2_.resize(half);
  // Index j in [1, half) is u = j eta (paired with -u, weight 2); slot 0 holds
  // the unpaired endpoint u = u_bar (weight 1).
  for (std::size_t j = 0; j < half; ++j) {
    const double u = j == 0 ? g.u_bar() : static_cast<double>(j) * eta_;
    const std::size_t k = j == 0 ? 0 : half + j;
    const double weight = j == 0 ? 1.0 : 2.0;
    const double d = u * u + b2;
    const double e = weight * u * std::exp(-t * engine.psi1_[k]);
    w0_[j] = e / d;
    w1_[j] = e * (-2.0 * beta_) / (d * d);
    w2_[j] = e * (8.0 * b2 / (d * d * d) - 2.0 / (d * d));
  }
}

double TransitionKernel::survival(double x) const { return killed_moments(x).h0; }

KilledMoments TransitionKernel::killed_moments(double x) const {
  if (!(x >= 0.0)) throw DomainError("killed moments: x must be nonnegative");
  const std::size_t half = w0_.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  {
    const double s = std::sin(static_cast<double>(half) * eta_ * x);
    s0 += w0_[0] * s;
    s1 += w1_[0] * s;
    s2 += w2_[0] * s;
  }
  const std::complex<double> rot = std::polar(1.0, eta_ * x);
  std::complex<double> z;
  for (std::size_t j = 1; j < half; ++j) {
    if ((j - 1) % kResync == 0) {
      z = std::polar(1.0, static_cast<double>(j) * eta_ * x);
    } else {
      z *= rot;
    }
    const double s = z.imag();
    s0 += w0_[j] * s;
    s1 += w1_[j] * s;
    s2 += w2_[j] * s;
  }
  const double pre = std::exp(-beta_ * x) * eta_ / kPi;
  KilledMoments m{pre * s0, pre * s1, pre * s2};
  if (beta_ > 0.0) m.h0 += 1.0 - std::exp(-2.0 * beta_ * x);
  return m;
}

MomentPair TransitionKernel::conditional_moments(double x) const {
  if (!(beta_ < 0.0)) throw DomainError("conditional moments are available for beta < 0 only");
  const KilledMoments m = killed_moments(x);
  if (!(m.h0 > 1e-12)) throw DomainError("conditional moments: survival probability too small");
  MomentPair g{m.h1 / m.h0, m.h2 / m.h0};
  if (!(g.g2 - g.g1 * g.g1 > 0.0)) throw NumericError("conditional variance is not positive");
  return g;
}

// ---------------------------------------------------------------------------

SurvivalCurve survival_lattice(const TimeChangeSpec& spec, const TcbmParams& params, double t,
                               const FftGrid& grid) {
  if (!(t > 0.0)) throw DomainError("survival_lattice: horizon must be positive");
  return LatticeEngine(spec, params, grid).survival(t);
}

double survival_at(const SurvivalCurve& curve, double x) { return curve.value_at(x); }

double survival_at(const TimeChangeSpec& spec, const TcbmParams& params, double t, double x) {
  TcbmParams p = params;
  p.x = x;
  const FftGrid grid = choose_grid(spec, p, t);
  return survival_lattice(spec, p, t, grid).value_at(x);
}

ConditionalDensity conditional_density(const TimeChangeSpec& spec, const TcbmParams& params,
                                       double t, double x, const FftGrid& grid) {
  return LatticeEngine(spec, params, grid).conditional_density(t, x);
}

MomentPair conditional_moments(const TimeChangeSpec& spec, const TcbmParams& params, double dt,
                               double x) {
  if (!(params.beta < 0.0)) throw DomainError("conditional moments are available for beta < 0 only");
  TcbmParams p = params;
  p.x = x;
  const LatticeEngine engine(spec, p, choose_grid(spec, p, dt));
  return engine.transition(dt).conditional_moments(x);
}

}  // namespace tcbm
