#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "tcbm/filter.hpp"
#include "tcbm/optimizer.hpp"

namespace tcbm {

inline constexpr std::array<const char*, 4> kThetaNames{"c", "beta_q", "recovery", "eta"};

std::array<double, 4> to_array(const Theta& t);
Theta from_array(const std::array<double, 4>& v);

// Search region D. The open ends of the admissible ranges are closed off;
// beta_q stays away from 0, where the pricing lattice would exceed 2^14.
struct ThetaBounds {
  Theta lower{0.05, -5.0, 0.0, 0.05};
  Theta upper{10.0, -0.25, 0.95, 20.0};

  void validate() const;
  bool contains(const Theta& t) const;
};

struct EstimationOptions {
  FilterMode mode = FilterMode::truncated;
  ThetaBounds bounds;
  std::vector<Theta> starts;  // empty: default_starts(init, bounds)
  OptimizerOptions optimizer;
  double hessian_step = 1e-4;  // relative
  double hessian_check = 0.05;  // stderr change allowed when the step is halved
};

// The initial point plus two more spread over the region.
std::vector<Theta> default_starts(const Theta& init, const ThetaBounds& bounds);

struct StartOutcome {
  Theta start;
  Theta end;
  double loglik = 0.0;
  bool converged = false;
  int evaluations = 0;
  std::string message;
};

struct PathSummary {
  double x_av = 0.0;
  double x_std = 0.0;  // sqrt of the annualized quadratic variation
};
// Weekly series; missing entries (NaN) are dropped.
PathSummary summarize_path(std::span<const double> x, double periods_per_year = 52.0);

struct EstimationResult {
  Theta theta_hat;
  std::vector<std::string> names;  // free parameters, in the order of the vectors below
  std::vector<double> estimate;
  std::vector<double> stderr_;
  Eigen::MatrixXd fisher;
  bool hessian_reliable = true;
  double loglik = 0.0;
  double rmse = 0.0;
  std::vector<double> x_path;  // filtered mode
  std::vector<double> x_sd;
  PathSummary path;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::vector<StartOutcome> starts;
  std::vector<TraceEntry> trace;  // of the winning start
  std::vector<std::string> warnings;
};

// c is not identified for the brownian kind and is left at its start value.
std::vector<std::size_t> free_parameters(const ModelConfig& config);

double log_likelihood(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                      const ModelConfig& config, const Theta& theta,
                      FilterMode mode = FilterMode::truncated);

EstimationResult maximize_likelihood(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                     const ModelConfig& config, const Theta& init,
                                     const EstimationOptions& options = {});

// Negative Hessian of the log-likelihood in the free coordinates by central
// differences with relative step rel.
Eigen::MatrixXd observed_information(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                     const ModelConfig& config, const Theta& theta,
                                     FilterMode mode, double rel, int* evaluations = nullptr);

// sqrt(mean over quoted cells of ((F(x_t) - Y) / w)^2).
double rmse(const CdsPanel& panel, std::span<const ZeroCurve> curves, const ModelConfig& config,
            const Theta& theta, std::span<const double> x_path);

// Per-date log-likelihood in Kalman form from the ex-ante forecast of the
// transformed observations; sums to the Kalman-mode filter total.
std::vector<double> weekly_loglik_kalman(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                         const ModelConfig& config, const Theta& theta);

struct VuongReport {
  double lambda = 0.0;
  double s_hat = 0.0;
  double statistic = 0.0;
  std::size_t lag = 0;
  std::vector<double> loglik_i;
  std::vector<double> loglik_j;
};

std::size_t newey_west_lag(std::size_t m);
// Bartlett-weighted long-run variance of a demeaned series.
double newey_west_variance(std::span<const double> d, std::size_t lag);

// lag < 0 selects newey_west_lag(M).
VuongReport vuong_test(std::span<const double> loglik_i, std::span<const double> loglik_j,
                       int lag = -1);

}  // namespace tcbm
