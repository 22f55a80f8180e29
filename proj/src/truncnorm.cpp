#include "tcbm/truncnorm.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;
// Continued fraction for the Mills ratio takes over above this point.
constexpr double kMillsSwitch = 5.0;
constexpr int kMillsTerms = 80;
// Below this alpha the truncation at 0 changes nothing in double precision.
constexpr double kAlphaFree = -37.0;
constexpr double kAlphaMax = 40.0;
constexpr int kBisection = 200;

// lambda(a) - a for a >= kMillsSwitch, from the continued fraction
// (1 - Phi(a)) / phi(a) = 1 / (a + 1 / (a + 2 / (a + 3 / ...))).
double mills_tail(double a) {
  double t = 0.0;
  for (int k = kMillsTerms; k >= 1; --k) t = k / (a + t);
  return t;
}

// (lambda - alpha, 1 - delta) for the restriction of N(-alpha, 1) to (0, inf).
std::pair<double, double> shape(double alpha) {
  double gap;  // lambda - alpha
  if (alpha >= kMillsSwitch) {
    gap = mills_tail(alpha);
  } else {
    gap = inverse_mills(alpha) - alpha;
  }
  const double lambda = alpha + gap;
  return {gap, 1.0 - lambda * gap};
}

}  // namespace

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double log_norm_cdf(double z) {
  if (z > -kMillsSwitch) return std::log(norm_cdf(z));
  return std::log(kInvSqrt2Pi) - 0.5 * z * z - std::log(inverse_mills(-z));
}

double inverse_mills(double a) {
  if (a >= kMillsSwitch) return a + mills_tail(a);
  return norm_pdf(a) / norm_sf(a);
}

TruncatedMoments truncated_moments(const NormalKernel& k) {
  if (!(k.sd > 0.0)) throw DomainError("truncated normal: sd must be positive");
  const double alpha = -k.mu / k.sd;
  const auto [gap, one_minus_delta] = shape(alpha);
  return {norm_sf(alpha), k.sd * gap, k.sd * k.sd * one_minus_delta};
}

NormalKernel match_truncated_moments(double m1, double m2) {
  const double var = m2 - m1 * m1;
  if (!(var > 0.0)) throw NumericError("moment matching: variance is not positive");
  if (!(m1 > 0.0) || !(var < m1 * m1))
    throw NumericError("moment matching: no truncated normal has these moments");
  const double target = std::sqrt(var) / m1;
  auto ratio = [](double alpha) {
    const auto [gap, omd] = shape(alpha);
    return std::sqrt(std::max(omd, 0.0)) / gap;
  };
  if (target <= ratio(kAlphaFree)) return {m1, std::sqrt(var)};
  if (target >= ratio(kAlphaMax))
    throw NumericError("moment matching: moments need a kernel far below the barrier");
  // ratio(alpha) increases from 0 to 1.
  double lo = kAlphaFree, hi = kAlphaMax;
  for (int i = 0; i < kBisection && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < target ? lo : hi) = mid;
  }
  const double alpha = 0.5 * (lo + hi);
  const double sd = m1 / shape(alpha).first;
  return {-alpha * sd, sd};
}

std::array<double, 7> conditional_powers(const NormalKernel& k, double lower) {
  if (!(k.sd > 0.0)) throw DomainError("normal kernel: sd must be positive");
  // Standardized moments J_j / J_0 of Z > a: J_1/J_0 = lambda(a),
  // J_j/J_0 = a^{j-1} lambda(a) + (j - 1) J_{j-2}/J_0.
  std::array<double, 7> z{};
  z[0] = 1.0;
  const double a = (lower - k.mu) / k.sd;
  if (std::isinf(a) || a < kAlphaFree) {
    for (int j = 1; j < 7; ++j) z[j] = j % 2 == 1 ? 0.0 : (j - 1) * z[j - 2];
  } else {
    const double lambda = inverse_mills(a);
    double apow = 1.0;  // a^{j-1}
    for (int j = 1; j < 7; ++j) {
      z[j] = apow * lambda + (j >= 2 ? (j - 1) * z[j - 2] : 0.0);
      apow *= a;
    }
  }
  // Binomial expansion of (mu + sd Z)^j.
  std::array<double, 7> out{};
  for (int j = 0; j < 7; ++j) {
    double binom = 1.0;
    double s = 0.0;
    for (int i = 0; i <= j; ++i) {
      s += binom * std::pow(k.mu, j - i) * std::pow(k.sd, i) * z[i];
      binom = binom * (j - i) / (i + 1);
    }
    out[j] = s;
  }
  return out;
}

double poly_expectation(std::span<const double> coeffs, const NormalKernel& k, double lower) {
  if (coeffs.size() > 7) throw DomainError("poly_expectation: degree above 6");
  const auto m = conditional_powers(k, lower);
  double s = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) s += coeffs[j] * m[j];
  return s;
}

std::array<double, 5> QuarticFit::nodes(double lo, double hi) {
  std::array<double, 5> x{};
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  for (int i = 0; i < 5; ++i) x[i] = c + r * std::cos((2 * i + 1) * std::numbers::pi / 10.0);
  return x;
}

QuarticFit QuarticFit::through(double lo, double hi, const std::array<double, 5>& values) {
  if (!(hi > lo)) throw DomainError("quartic fit: empty interval");
  QuarticFit f;
  f.centre = 0.5 * (lo + hi);
  f.radius = 0.5 * (hi - lo);
  Eigen::Matrix<double, 5, 5> v;
  Eigen::Matrix<double, 5, 1> y;
  for (int i = 0; i < 5; ++i) {
    const double z = std::cos((2 * i + 1) * std::numbers::pi / 10.0);
    double p = 1.0;
    for (int j = 0; j < 5; ++j, p *= z) v(i, j) = p;
    y(i) = values[i];
  }
  const Eigen::Matrix<double, 5, 1> c = v.partialPivLu().solve(y);
  for (int j = 0; j < 5; ++j) f.coeffs[j] = c(j);
  return f;
}

double QuarticFit::operator()(double x) const {
  const double z = (x - centre) / radius;
  double s = 0.0;
  for (int j = 4; j >= 0; --j) s = s * z + coeffs[j];
  return s;
}

double QuarticFit::expectation(const NormalKernel& k, double lower) const {
  const NormalKernel scaled{(k.mu - centre) / radius, k.sd / radius};
  const double zl = std::isinf(lower) ? lower : (lower - centre) / radius;
  return poly_expectation(coeffs, scaled, zl);
}

}  // namespace tcbm
