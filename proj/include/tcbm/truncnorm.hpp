#pragma once

#include <array>
#include <limits>
#include <span>

namespace tcbm {

double norm_pdf(double z);
double norm_cdf(double z);
// 1 - Phi(z) without cancellation.
double norm_sf(double z);
double log_norm_cdf(double z);
// lambda(a) = phi(a) / (1 - Phi(a)), accurate for large a.
double inverse_mills(double a);

// Parameters of a normal kernel N(mu, sd^2).
struct NormalKernel {
  double mu = 0.0;
  double sd = 1.0;
};

// Mean and variance of N(mu, sd^2) restricted to (0, infinity), and the
// restricted mass Phi(mu / sd).
struct TruncatedMoments {
  double mass = 0.0;
  double mean = 0.0;
  double var = 0.0;
};
TruncatedMoments truncated_moments(const NormalKernel& k);

// Kernel whose restriction to (0, infinity) has the given mean and second
// moment. Falls back to the untruncated kernel when the restriction is
// immaterial; NumericError when var >= mean^2 or no kernel fits.
NormalKernel match_truncated_moments(double m1, double m2);

// E[X^j | X > lower] for X ~ N(mu, sd^2), j = 0..6; lower may be -infinity.
std::array<double, 7> conditional_powers(const NormalKernel& k, double lower);

// E[p(X) | X > lower] for a polynomial with ascending coefficients (degree <= 6).
double poly_expectation(std::span<const double> coeffs, const NormalKernel& k, double lower);

// Quartic interpolant through 5 Chebyshev nodes on [lo, hi], in the scaled
// variable z = (x - centre) / radius.
struct QuarticFit {
  double centre = 0.0;
  double radius = 1.0;
  std::array<double, 5> coeffs{};  // ascending powers of z

  static std::array<double, 5> nodes(double lo, double hi);
  // values[i] taken at nodes(lo, hi)[i].
  static QuarticFit through(double lo, double hi, const std::array<double, 5>& values);
  double operator()(double x) const;
  // E[fit(X) | X > lower] for X ~ N(k.mu, k.sd^2).
  double expectation(const NormalKernel& k, double lower) const;
};

}  // namespace tcbm
