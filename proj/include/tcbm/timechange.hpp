#pragma once

#include <complex>
#include <random>
#include <string>

namespace tcbm {

using Rng = std::mt19937_64;

enum class TimeChangeKind { variance_gamma, exponential, brownian };

// Levy time change G_t with drift b, jump activity c and jump scale
// a = (1 - b) / c, so that E[G_t] = t. The brownian kind is the c = 0
// limit G_t = b t; b = 1 gives plain Brownian motion.
class TimeChangeSpec {
 public:
  static TimeChangeSpec variance_gamma(double b, double c);
  static TimeChangeSpec exponential(double b, double c);
  static TimeChangeSpec brownian(double speed = 1.0);

  TimeChangeKind kind() const noexcept { return kind_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double a() const noexcept { return a_; }
  std::string name() const;

  // psi(u, 1); psi(u, t) = t * psi(u, 1).
  double unit_exponent(double u) const noexcept;
  std::complex<double> unit_exponent(std::complex<double> u) const noexcept;

  friend bool operator==(const TimeChangeSpec&, const TimeChangeSpec&) = default;

 private:
  TimeChangeSpec(TimeChangeKind kind, double b, double c);

  TimeChangeKind kind_;
  double b_;
  double c_;
  double a_;
};

// Log-leverage X_t = x + sigma W_{G_t} + beta sigma^2 G_t.
struct TcbmParams {
  double x = 0.0;
  double sigma = 0.3;
  double beta = -0.5;

  // (lambda x, lambda sigma, beta / lambda): leaves all survival
  // probabilities unchanged.
  TcbmParams rescaled(double lambda) const { return {lambda * x, lambda * sigma, beta / lambda}; }
  void validate() const;
};

// psi(u, t) = -log E[exp(-u G_t)].
double laplace_exponent(const TimeChangeSpec& spec, double u, double t);
std::complex<double> laplace_exponent_complex(const TimeChangeSpec& spec, std::complex<double> u,
                                              double t);

// d psi / du at u = 0, i.e. E[G_t].
double mean_speed(const TimeChangeSpec& spec, double t);

// Exact draw of G_{t+dt} - G_t.
double sample_increment(const TimeChangeSpec& spec, double dt, Rng& rng);

}  // namespace tcbm
