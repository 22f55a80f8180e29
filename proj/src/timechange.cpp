#include "tcbm/timechange.hpp"

#include <cmath>

#include "tcbm/errors.hpp"

namespace tcbm {

TimeChangeSpec::TimeChangeSpec(TimeChangeKind kind, double b, double c)
    : kind_(kind), b_(b), c_(c), a_(kind == TimeChangeKind::brownian ? 0.0 : (1.0 - b) / c) {}

TimeChangeSpec TimeChangeSpec::variance_gamma(double b, double c) {
  if (!(b > 0.0 && b <= 1.0)) throw DomainError("time change drift b must lie in (0, 1]");
  if (!(c > 0.0)) throw DomainError("VG jump activity c must be positive (use brownian for c = 0)");
  return {TimeChangeKind::variance_gamma, b, c};
}

TimeChangeSpec TimeChangeSpec::exponential(double b, double c) {
  if (!(b > 0.0 && b <= 1.0)) throw DomainError("time change drift b must lie in (0, 1]");
  if (!(c > 0.0)) throw DomainError("EXP jump activity c must be positive (use brownian for c = 0)");
  return {TimeChangeKind::exponential, b, c};
}

TimeChangeSpec TimeChangeSpec::brownian(double speed) {
  if (!(speed > 0.0 && speed <= 1.0)) throw DomainError("brownian speed must lie in (0, 1]");
  return {TimeChangeKind::brownian, speed, 0.0};
}

std::string TimeChangeSpec::name() const {
  switch (kind_) {
    case TimeChangeKind::variance_gamma:
      return "vg";
    case TimeChangeKind::exponential:
      return "exp";
    case TimeChangeKind::brownian:
      return "blackcox";
  }
  return "?";
}

double TimeChangeSpec::unit_exponent(double u) const noexcept {
  switch (kind_) {
    case TimeChangeKind::variance_gamma:
      return b_ * u + c_ * std::log1p(a_ * u);
    case TimeChangeKind::exponential:
      return b_ * u + a_ * c_ * u / (1.0 + a_ * u);
    case TimeChangeKind::brownian:
      return b_ * u;
  }
  return 0.0;
}

std::complex<double> TimeChangeSpec::unit_exponent(std::complex<double> u) const noexcept {
  switch (kind_) {
    case TimeChangeKind::variance_gamma:
      return b_ * u + c_ * std::log(1.0 + a_ * u);
    case TimeChangeKind::exponential:
      return b_ * u + a_ * c_ * u / (1.0 + a_ * u);
    case TimeChangeKind::brownian:
      return b_ * u;
  }
  return 0.0;
}

void TcbmParams::validate() const {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(x >= 0.0)) throw DomainError("initial log-leverage must be nonnegative");
  if (!std::isfinite(beta)) throw DomainError("beta must be finite");
}

double laplace_exponent(const TimeChangeSpec& spec, double u, double t) {
  if (!(u >= 0.0) || !(t >= 0.0)) throw DomainError("laplace_exponent requires u >= 0 and t >= 0");
  return t * spec.unit_exponent(u);
}

std::complex<double> laplace_exponent_complex(const TimeChangeSpec& spec, std::complex<double> u,
                                              double t) {
  if (!(u.real() >= 0.0) || !(t >= 0.0))
    throw DomainError("laplace_exponent_complex requires Re(u) >= 0 and t >= 0");
  return t * spec.unit_exponent(u);
}

double mean_speed(const TimeChangeSpec& spec, double t) {
  switch (spec.kind()) {
    case TimeChangeKind::variance_gamma:
    case TimeChangeKind::exponential:
      return t * (spec.b() + spec.c() * spec.a());
    case TimeChangeKind::brownian:
      return t * spec.b();
  }
  return 0.0;
}

double sample_increment(const TimeChangeSpec& spec, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("sample_increment requires dt > 0");
  const double drift = spec.b() * dt;
  switch (spec.kind()) {
    case TimeChangeKind::variance_gamma: {
      std::gamma_distribution<double> jumps(spec.c() * dt, spec.a());
      return drift + jumps(rng);
    }
    case TimeChangeKind::exponential: {
      std::poisson_distribution<long> count(spec.c() * dt);
      const long n = count(rng);
      if (n == 0) return drift;
      // Sum of n exponentials with mean a.
      std::gamma_distribution<double> total(static_cast<double>(n), spec.a());
      return drift + total(rng);
    }
    case TimeChangeKind::brownian:
      return drift;
  }
  return drift;
}

}  // namespace tcbm
