#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tcbm {

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  void validate() const;
  std::vector<double> project(std::vector<double> x) const;
  bool contains(std::span<const double> x) const;
};

struct OptimizerOptions {
  double gradient_step = 1e-5;  // relative central-difference step
  double gradient_tol = 1e-6;   // times max(1, |f|), on the projected gradient
  double step_tol = 1e-9;
  int max_evaluations = 500;
  double armijo = 1e-4;
};

struct TraceEntry {
  int iteration = 0;
  int evaluations = 0;
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  std::vector<TraceEntry> trace;
};

// Objective to maximize. Throwing marks the point as infeasible.
using Objective = std::function<double(std::span<const double>)>;

// Evaluates independent points concurrently; failures come back as -inf.
std::vector<double> evaluate_batch(const Objective& f, const std::vector<std::vector<double>>& points,
                                   int& evaluations);

// Per-coordinate step rel * max(|x_i|, 1), kept inside the box by switching
// to a one-sided difference at a bound.
std::vector<double> numeric_gradient(const Objective& f, std::span<const double> x, double fx,
                                     const Box& box, double rel, int& evaluations);

// Projected BFGS ascent with Armijo backtracking on the projection arc.
OptimizerResult maximize_in_box(const Objective& f, std::vector<double> x0, const Box& box,
                                const OptimizerOptions& options = {});

}  // namespace tcbm
