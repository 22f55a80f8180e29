#include "tcbm/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, std::span<const double> x, int& evaluations) {
  ++evaluations;
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const std::exception&) {
    return kNegInf;
  }
}

double step_size(double x, double rel) { return rel * std::max(std::abs(x), 1.0); }

// Gradient of the maximization problem with components that would push
// through an active bound removed.
double projected_norm(std::span<const double> x, std::span<const double> g, const Box& box) {
  double norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double gi = g[i];
    if (x[i] <= box.lower[i] && gi < 0.0) gi = 0.0;
    if (x[i] >= box.upper[i] && gi > 0.0) gi = 0.0;
    norm = std::max(norm, std::abs(gi));
  }
  return norm;
}

}  // namespace

void Box::validate() const {
  if (lower.size() != upper.size()) throw DomainError("box bounds differ in size");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] < upper[i])) throw DomainError("box bounds must satisfy lower < upper");
}

std::vector<double> Box::project(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

std::vector<double> evaluate_batch(const Objective& f, const std::vector<std::vector<double>>& points,
                                   int& evaluations) {
  std::vector<double> values(points.size());
  const long count = static_cast<long>(points.size());
  // Stencil points are independent; each evaluation owns its state.
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    int unused = 0;
    values[i] = safe_eval(f, points[i], unused);
  }
  evaluations += static_cast<int>(points.size());
  return values;
}

std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double fx,
                                     const Box& box, double rel, int& evaluations) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> points;
  std::vector<int> up(n, -1), down(n, -1);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = step_size(x[i], rel);
    std::vector<double> p(x.begin(), x.end());
    if (x[i] + h[i] <= box.upper[i]) {
      p[i] = x[i] + h[i];
      up[i] = static_cast<int>(points.size());
      points.push_back(p);
    }
    if (x[i] - h[i] >= box.lower[i]) {
      p[i] = x[i] - h[i];
      down[i] = static_cast<int>(points.size());
      points.push_back(p);
    }
  }
  const std::vector<double> v = evaluate_batch(f, points, evaluations);
  std::vector<double> g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double fp = up[i] >= 0 ? v[up[i]] : fx;
    const double fm = down[i] >= 0 ? v[down[i]] : fx;
    const double span = h[i] * ((up[i] >= 0) + (down[i] >= 0));
    if (!std::isfinite(fp) || !std::isfinite(fm) || span == 0.0)
      throw NumericError("numeric gradient: objective not finite next to the current point");
    g[i] = (fp - fm) / span;
  }
  return g;
}

OptimizerResult maximize_in_box(const Objective& f, std::vector<double> x0, const Box& box,
                                const OptimizerOptions& options) {
  box.validate();
  if (x0.size() != box.size()) throw DomainError("optimizer: start and box differ in size");
  const std::size_t n = x0.size();
  OptimizerResult r;
  std::vector<double> x = box.project(std::move(x0));
  double fx = safe_eval(f, x, r.evaluations);
  if (!std::isfinite(fx)) throw NumericError("optimizer: objective fails at the starting point");
  std::vector<double> g = numeric_gradient(f, x, fx, box, options.gradient_step, r.evaluations);

  // Inverse Hessian of -f.
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  double gamma = 1.0;  // scale of H after a reset
  bool scaled = false;
  std::vector<char> last_free(n, 1);
  auto record = [&](int it) {
    r.trace.push_back({it, r.evaluations, x, fx, projected_norm(x, g, box)});
  };
  record(0);

  for (int it = 1;; ++it) {
    r.iterations = it - 1;
    const double gnorm = projected_norm(x, g, box);
    if (gnorm <= options.gradient_tol * std::max(1.0, std::abs(fx))) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    if (r.evaluations >= options.max_evaluations) {
      r.message = "evaluation budget exhausted";
      break;
    }

    // Free variables: not pinned at a bound by the gradient.
    std::vector<char> free(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] <= box.lower[i] && g[i] < 0.0) free[i] = 0;
      if (x[i] >= box.upper[i] && g[i] > 0.0) free[i] = 0;
    }
    Eigen::VectorXd grad(n);
    for (std::size_t i = 0; i < n; ++i) grad(i) = free[i] ? g[i] : 0.0;
    if (!scaled) {
      // First step moves about 0.1 in the largest coordinate.
      gamma = 0.1 / std::max(grad.cwiseAbs().maxCoeff(), 1e-12);
      H = Eigen::MatrixXd::Identity(n, n) * gamma;
      scaled = true;
    }
    if (free != last_free) {
      // The curvature pairs were collected on another face of the box.
      H = Eigen::MatrixXd::Identity(n, n) * gamma;
      last_free = free;
    }
    // Direction from the free block of H only.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!free[i]) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (free[j]) d(i) += H(i, j) * grad(j);
    }
    if (!(d.dot(grad) > 0.0)) {
      H = Eigen::MatrixXd::Identity(n, n) * gamma;
      d = gamma * grad;
    }

    const double dmax = d.cwiseAbs().maxCoeff();
    double alpha = 1.0;
    std::vector<double> xn;
    double fn = kNegInf;
    bool accepted = false;
    while (alpha * dmax > options.step_tol && r.evaluations < options.max_evaluations) {
      xn = x;
      for (std::size_t i = 0; i < n; ++i) xn[i] += alpha * d(i);
      xn = box.project(std::move(xn));
      double gain = 0.0;
      for (std::size_t i = 0; i < n; ++i) gain += g[i] * (xn[i] - x[i]);
      fn = safe_eval(f, xn, r.evaluations);
      if (std::isfinite(fn) && gain > 0.0 && fn >= fx + options.armijo * gain) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      r.iterations = it;
      if (r.evaluations >= options.max_evaluations) {
        r.message = "evaluation budget exhausted";
      } else {
        r.converged = true;
        r.message = "step tolerance reached";
      }
      break;
    }
    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(xn[i] - x[i]));
    if (step <= options.step_tol) {
      x = xn;
      fx = fn;
      r.converged = true;
      r.message = "step tolerance reached";
      r.iterations = it;
      record(it);
      break;
    }

    std::vector<double> gn;
    try {
      gn = numeric_gradient(f, xn, fn, box, options.gradient_step, r.evaluations);
    } catch (const NumericError&) {
      x = xn;
      fx = fn;
      r.message = "gradient unavailable at the last iterate";
      r.iterations = it;
      record(it);
      break;
    }
    Eigen::VectorXd s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s(i) = xn[i] - x[i];
      y(i) = g[i] - gn[i];  // gradient change of -f
    }
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      gamma = sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = std::move(xn);
    fx = fn;
    g = std::move(gn);
    record(it);
  }
  r.x = x;
  r.value = fx;
  r.gradient = g;
  return r;
}

}  // namespace tcbm
