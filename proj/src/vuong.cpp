#include <cmath>

#include "tcbm/errors.hpp"
#include "tcbm/estimation.hpp"

namespace tcbm {

std::size_t newey_west_lag(std::size_t m) {
  return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(m) / 100.0, 2.0 / 9.0)));
}

double newey_west_variance(std::span<const double> d, std::size_t lag) {
  const std::size_t m = d.size();
  if (m < 2) throw DomainError("Newey-West variance needs at least two observations");
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(m);
  auto gamma = [&](std::size_t l) {
    double s = 0.0;
    for (std::size_t t = l; t < m; ++t) s += (d[t] - mean) * (d[t - l] - mean);
    return s / static_cast<double>(m);
  };
  double var = gamma(0);
  for (std::size_t l = 1; l <= lag && l < m; ++l)
    var += 2.0 * (1.0 - static_cast<double>(l) / static_cast<double>(lag + 1)) * gamma(l);
  return var;
}

VuongReport vuong_test(std::span<const double> loglik_i, std::span<const double> loglik_j, int lag) {
  if (loglik_i.size() != loglik_j.size()) throw DomainError("Vuong test: series lengths differ");
  const std::size_t m = loglik_i.size();
  if (m < 20) throw DomainError("Vuong test needs at least 20 observations");
  VuongReport r;
  r.loglik_i.assign(loglik_i.begin(), loglik_i.end());
  r.loglik_j.assign(loglik_j.begin(), loglik_j.end());
  r.lag = lag < 0 ? newey_west_lag(m) : static_cast<std::size_t>(lag);
  std::vector<double> d(m);
  bool identical = true;
  for (std::size_t t = 0; t < m; ++t) {
    d[t] = loglik_i[t] - loglik_j[t];
    r.lambda += d[t];
    identical = identical && d[t] == 0.0;
  }
  if (identical) return r;  // lambda = 0, T = 0 by convention
  const double var = newey_west_variance(d, r.lag);
  if (!(var > 0.0)) throw NumericError("Vuong test: difference series has no variance");
  r.s_hat = std::sqrt(var);
  r.statistic = r.lambda / (r.s_hat * std::sqrt(static_cast<double>(m)));
  return r;
}

}  // namespace tcbm
