#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tcbm {

// Cubic Hermite basis for one cell of a uniform grid.
struct HermiteWeights {
  std::size_t cell = 0;
  double h = 0.0;
  double v[4] = {0, 0, 0, 0};  // multiply (y_i, d_i, y_{i+1}, d_{i+1})
  double d[4] = {0, 0, 0, 0};  // derivative weights

  static HermiteWeights at(double x, double step, std::size_t nodes) {
    HermiteWeights w;
    w.h = step;
    const double pos = x / step;
    std::size_t i = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    if (i + 1 >= nodes) i = nodes - 2;
    const double s = pos - static_cast<double>(i);
    const double s2 = s * s;
    const double s3 = s2 * s;
    w.cell = i;
    w.v[0] = 2 * s3 - 3 * s2 + 1;
    w.v[1] = (s3 - 2 * s2 + s) * step;
    w.v[2] = -2 * s3 + 3 * s2;
    w.v[3] = (s3 - s2) * step;
    w.d[0] = (6 * s2 - 6 * s) / step;
    w.d[1] = 3 * s2 - 4 * s + 1;
    w.d[2] = (-6 * s2 + 6 * s) / step;
    w.d[3] = 3 * s2 - 2 * s;
    return w;
  }

  double value(std::span<const double> y, std::span<const double> dy) const {
    return v[0] * y[cell] + v[1] * dy[cell] + v[2] * y[cell + 1] + v[3] * dy[cell + 1];
  }
  double slope(std::span<const double> y, std::span<const double> dy) const {
    return d[0] * y[cell] + d[1] * dy[cell] + d[2] * y[cell + 1] + d[3] * dy[cell + 1];
  }
};

// Fritsch-Carlson limiter: adjusts node slopes so the Hermite interpolant of
// nondecreasing data stays nondecreasing. Exact slopes of a monotone smooth
// function pass through unchanged except where the data are locally flat.
inline void limit_monotone_slopes(std::span<const double> y, std::span<double> dy, double step) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double delta = (y[i + 1] - y[i]) / step;
    if (delta <= 0.0) {
      dy[i] = 0.0;
      dy[i + 1] = 0.0;
      continue;
    }
    dy[i] = std::max(dy[i], 0.0);
    dy[i + 1] = std::max(dy[i + 1], 0.0);
    const double alpha = dy[i] / delta;
    const double beta = dy[i + 1] / delta;
    const double r2 = alpha * alpha + beta * beta;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      dy[i] = tau * alpha * delta;
      dy[i + 1] = tau * beta * delta;
    }
  }
}

// Quintic Hermite basis for one cell of a uniform grid, using values, first
// and second derivatives at both ends.
struct QuinticWeights {
  std::size_t cell = 0;
  double v[6] = {0, 0, 0, 0, 0, 0};  // multiply (y_i, d_i, c_i, y_{i+1}, d_{i+1}, c_{i+1})
  double d[6] = {0, 0, 0, 0, 0, 0};

  static std::size_t locate(double x, double step, std::size_t nodes, double& s) {
    const double pos = x / step;
    std::size_t i = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
    if (i + 1 >= nodes) i = nodes - 2;
    s = pos - static_cast<double>(i);
    return i;
  }

  static QuinticWeights at(double x, double step, std::size_t nodes) {
    QuinticWeights w;
    double s = 0.0;
    w.cell = locate(x, step, nodes, s);
    w.fill(s, step);
    return w;
  }

  void fill(double s, double h) {
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    v[0] = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    v[1] = (s - 6 * s3 + 8 * s4 - 3 * s5) * h;
    v[2] = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5) * h * h;
    v[3] = 10 * s3 - 15 * s4 + 6 * s5;
    v[4] = (-4 * s3 + 7 * s4 - 3 * s5) * h;
    v[5] = 0.5 * (s3 - 2 * s4 + s5) * h * h;
    d[0] = (-30 * s2 + 60 * s3 - 30 * s4) / h;
    d[1] = 1 - 18 * s2 + 32 * s3 - 15 * s4;
    d[2] = (s - 4.5 * s2 + 6 * s3 - 2.5 * s4) * h;
    d[3] = (30 * s2 - 60 * s3 + 30 * s4) / h;
    d[4] = -12 * s2 + 28 * s3 - 15 * s4;
    d[5] = (1.5 * s2 - 4 * s3 + 2.5 * s4) * h;
  }

  double value(std::span<const double> y, std::span<const double> dy,
               std::span<const double> c) const {
    const std::size_t i = cell;
    return v[0] * y[i] + v[1] * dy[i] + v[2] * c[i] + v[3] * y[i + 1] + v[4] * dy[i + 1] +
           v[5] * c[i + 1];
  }
  double slope(std::span<const double> y, std::span<const double> dy,
               std::span<const double> c) const {
    const std::size_t i = cell;
    return d[0] * y[i] + d[1] * dy[i] + d[2] * c[i] + d[3] * y[i + 1] + d[4] * dy[i + 1] +
           d[5] * c[i + 1];
  }
};

// True where the quintic through cell i is nondecreasing at a set of interior
// probe points; cells that fail fall back to the limited cubic.
inline std::vector<char> quintic_monotone_cells(std::span<const double> y,
                                                std::span<const double> dy,
                                                std::span<const double> c, double step) {
  constexpr int kProbes = 8;
  const std::size_t n = y.size();
  std::vector<char> ok(n > 0 ? n - 1 : 0, 1);
  QuinticWeights w;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    w.cell = i;
    if (dy[i] < 0.0 || dy[i + 1] < 0.0) {
      ok[i] = 0;
      continue;
    }
    for (int k = 1; k < kProbes; ++k) {
      w.fill(static_cast<double>(k) / kProbes, step);
      if (w.slope(y, dy, c) < 0.0) {
        ok[i] = 0;
        break;
      }
    }
  }
  return ok;
}

}  // namespace tcbm
