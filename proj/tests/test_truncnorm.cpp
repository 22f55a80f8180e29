#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tcbm/errors.hpp"
#include "tcbm/truncnorm.hpp"

using namespace tcbm;

namespace {

double quad_expectation(const std::vector<double>& c, double mu, double sd, double lower) {
  using boost::math::quadrature::gauss_kronrod;
  auto dens = [&](double x) {
    double p = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) p = p * x + c[j];
    return p * std::exp(-0.5 * std::pow((x - mu) / sd, 2)) / (sd * std::sqrt(2.0 * M_PI));
  };
  const double lo = std::isinf(lower) ? mu - 40.0 * sd : lower;
  const double hi = mu + 40.0 * sd;
  double mass = 0.0, total = 0.0;
  const int panels = 80;
  for (int i = 0; i < panels; ++i) {
    const double a = lo + (hi - lo) * i / panels, b = lo + (hi - lo) * (i + 1) / panels;
    total += gauss_kronrod<double, 61>::integrate(dens, a, b, 10, 1e-15);
    mass += gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(-0.5 * std::pow((x - mu) / sd, 2)) / (sd * std::sqrt(2.0 * M_PI)); }, a, b,
        10, 1e-15);
  }
  return total / mass;
}

}  // namespace

TEST(NormalFunctions, AgreeWithBoost) {
  boost::math::normal_distribution<double> n;
  for (double z : {-30.0, -8.0, -5.0, -1.3, 0.0, 0.7, 4.99, 5.01, 12.0}) {
    EXPECT_NEAR(norm_cdf(z) / boost::math::cdf(n, z), 1.0, 1e-13) << z;
    EXPECT_NEAR(norm_sf(z) / boost::math::cdf(boost::math::complement(n, z)), 1.0, 1e-13) << z;
    EXPECT_NEAR(log_norm_cdf(z), std::log(boost::math::cdf(n, z)), 1e-12 * std::max(1.0, std::abs(std::log(boost::math::cdf(n, z))))) << z;
    EXPECT_NEAR(inverse_mills(z) / (boost::math::pdf(n, z) / boost::math::cdf(boost::math::complement(n, z))), 1.0, 1e-12)
        << z;
  }
  // Asymptotic series of the Mills ratio beyond double-precision underflow.
  const double z = 40.0;
  EXPECT_NEAR(log_norm_cdf(-z), -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * M_PI) +
                                    std::log(1.0 - 1.0 / (z * z) + 3.0 / std::pow(z, 4) - 15.0 / std::pow(z, 6)),
              1e-10);
}

TEST(TruncatedMoments, WorkedValue) {
  const auto m = truncated_moments({1.0, 1.0});
  EXPECT_NEAR(m.mean, 1.0 + norm_pdf(1.0) / norm_cdf(1.0), 1e-15);
  EXPECT_NEAR(m.mean, 1.2876, 1e-4);
  EXPECT_NEAR(m.mass, norm_cdf(1.0), 1e-15);
  EXPECT_NEAR(m.mean, quad_expectation({0.0, 1.0}, 1.0, 1.0, 0.0), 1e-12);
  EXPECT_NEAR(m.var + m.mean * m.mean, quad_expectation({0.0, 0.0, 1.0}, 1.0, 1.0, 0.0), 1e-12);
}

TEST(MatchTruncatedMoments, RoundTrip) {
  for (double sd : {0.05, 1.0, 3.0}) {
    for (double ratio = -3.0; ratio <= 6.0; ratio += 0.25) {
      const NormalKernel k{ratio * sd, sd};
      const auto m = truncated_moments(k);
      const auto back = match_truncated_moments(m.mean, m.var + m.mean * m.mean);
      EXPECT_NEAR(back.mu, k.mu, 1e-8 * sd) << "ratio=" << ratio;
      EXPECT_NEAR(back.sd, k.sd, 1e-8 * sd) << "ratio=" << ratio;
    }
  }
}

TEST(MatchTruncatedMoments, FarFromBarrierIsUntruncated) {
  const auto k = match_truncated_moments(5.0, 25.0 + 0.01);
  EXPECT_DOUBLE_EQ(k.mu, 5.0);
  EXPECT_NEAR(k.sd, 0.1, 1e-13);
}

TEST(MatchTruncatedMoments, Errors) {
  EXPECT_THROW(match_truncated_moments(1.0, 1.0), NumericError);
  EXPECT_THROW(match_truncated_moments(1.0, 0.5), NumericError);
  // Coefficient of variation at or above 1 is beyond any truncated normal.
  EXPECT_THROW(match_truncated_moments(1.0, 2.5), NumericError);
}

TEST(PolyExpectation, MatchesQuadrature) {
  const std::vector<std::vector<double>> polys = {
      {1.0}, {0.3, -1.2}, {2.0, 0.5, -0.7, 0.1, 0.05}, {-1.0, 0.2, 0.3, -0.4, 0.5, -0.06, 0.07}};
  for (const auto& c : polys) {
    for (const NormalKernel k : {NormalKernel{1.0, 0.4}, NormalKernel{-0.5, 1.3}, NormalKernel{3.0, 0.2}}) {
      for (double lower : {0.0, -std::numeric_limits<double>::infinity(), 0.8}) {
        const double q = quad_expectation(c, k.mu, k.sd, lower);
        EXPECT_NEAR(poly_expectation(c, k, lower), q, 1e-10 * std::max(1.0, std::abs(q)))
            << "mu=" << k.mu << " lower=" << lower << " degree=" << c.size() - 1;
      }
    }
  }
}

TEST(QuarticFit, ExactForQuartics) {
  auto p = [](double x) { return 0.3 - 1.1 * x + 0.4 * x * x - 0.02 * std::pow(x, 3) + 0.007 * std::pow(x, 4); };
  const double lo = 0.2, hi = 3.1;
  std::array<double, 5> v{};
  const auto x = QuarticFit::nodes(lo, hi);
  for (int i = 0; i < 5; ++i) v[i] = p(x[i]);
  const auto f = QuarticFit::through(lo, hi, v);
  for (double t = -1.0; t < 5.0; t += 0.37) EXPECT_NEAR(f(t), p(t), 1e-12);
  const NormalKernel k{1.4, 0.5};
  // E[p(X) | X > 0] with p in original coordinates.
  const std::vector<double> c = {0.3, -1.1, 0.4, -0.02, 0.007};
  EXPECT_NEAR(f.expectation(k, 0.0), poly_expectation(c, k, 0.0), 1e-12);
  EXPECT_NEAR(f.expectation(k, 0.0), quad_expectation(c, 1.4, 0.5, 0.0), 1e-10);
}

TEST(QuarticFit, NodesAreChebyshev) {
  const auto x = QuarticFit::nodes(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(std::cos(5.0 * std::acos(x[i])), 0.0, 1e-14);
}
