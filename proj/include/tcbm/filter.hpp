#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tcbm/firstpassage.hpp"
#include "tcbm/panel.hpp"
#include "tcbm/pricing.hpp"
#include "tcbm/timechange.hpp"
#include "tcbm/truncnorm.hpp"
#include "tcbm/zero_curve.hpp"

namespace tcbm {

enum class FilterMode { truncated, kalman };

// Frozen settings shared by pricing and filtering.
struct ModelConfig {
  TimeChangeKind kind = TimeChangeKind::variance_gamma;
  double b = 0.2;
  double sigma = 0.3;
  double beta = -0.5;  // physical-measure drift
  double premium_dt = kDefaultPremiumDt;
  double eps = kDefaultFftEps;
  double x_range = kPricingXRange;

  // The Brownian kind runs at speed b and ignores c.
  TimeChangeSpec time_change(double c) const;
  TcbmParams physical() const { return {x_range, sigma, beta}; }
  TcbmParams risk_neutral(double beta_q) const { return {x_range, sigma, beta_q}; }
};

// Free parameters.
struct Theta {
  double c = 1.0;
  double beta_q = -1.5;
  double recovery = 0.6;
  double eta = 1.5;
};

// Quotes of one date turned into direct noisy observations of x.
struct MeasurementVector {
  std::size_t t = 0;
  std::vector<double> x_tilde;
  std::vector<double> w_tilde;  // width / |dF/dx|
  std::vector<double> width;
  std::vector<char> valid;

  std::size_t valid_count() const;
};

// Gaussian product of the valid observations: N(x; mean, 1/precision) times
// exp(log_const), with the Jacobian factors already folded into log_const.
struct GaussianFusion {
  double mean = 0.0;
  double precision = 0.0;
  double log_const = 0.0;
};
GaussianFusion fuse(const MeasurementVector& meas, double eta);

// Normal kernel N(mean, var), restricted to x > 0 in truncated mode, plus the
// accumulated log-likelihood. A diffuse state carries no kernel yet.
struct FilterState {
  double mean = 0.0;
  double var = 0.0;
  double loglik = 0.0;
  FilterMode mode = FilterMode::truncated;
  bool diffuse = true;

  static FilterState start(FilterMode mode);
  NormalKernel kernel() const;
  double posterior_mean() const;
  double posterior_sd() const;
  // argmax over x > 0 of the represented density.
  double posterior_mode() const;
};

FilterState measurement_update(const FilterState& state, const MeasurementVector& meas, double eta);

struct Prediction {
  FilterState state;
  double m0 = 0.0;  // survival probability under the kernel
  double m1 = 0.0;
  double m2 = 0.0;
};
Prediction predict_step(const FilterState& state, const TransitionKernel& kernel);
Prediction predict_step(const FilterState& state, const TimeChangeSpec& spec,
                        const TcbmParams& params_p, double dt);

// Survival curves for one Theta under Q, and per-date CDS pricers.
class MeasurementModel {
 public:
  MeasurementModel(const ModelConfig& config, const Theta& theta,
                   std::span<const ZeroCurve> curves, std::span<const double> tenors,
                   bool parallel = true);

  const ZeroCurve& curve(std::size_t t) const;
  CdsPricer pricer(std::size_t t, std::size_t k) const;
  MeasurementVector measure(const CdsPanel& panel, std::size_t t) const;
  double spread(std::size_t t, std::size_t k, double x) const { return pricer(t, k).spread(x); }

 private:
  ModelConfig config_;
  Theta theta_;
  std::vector<ZeroCurve> curves_;
  std::vector<double> tenors_;
  std::shared_ptr<const SurvivalSet> survival_;
};

// One-step transition sums for each distinct step length, built on demand.
class TransitionCache {
 public:
  TransitionCache(const TimeChangeSpec& spec, const TcbmParams& params_p,
                  double eps = kDefaultFftEps);
  const TransitionKernel& at(double dt);

 private:
  TimeChangeSpec spec_;
  TcbmParams params_;
  double eps_;
  std::map<long, std::unique_ptr<TransitionKernel>> kernels_;
};

struct FilterResult {
  double loglik = 0.0;
  std::vector<FilterState> posterior;  // after each date's measurement
  std::vector<double> x_mode;
  std::vector<double> x_mean;
  std::vector<double> x_sd;
  // Per-date share of loglik: survival factor of the step into the date plus
  // the measurement mass. Zero on skipped dates.
  std::vector<double> step_loglik;
  std::vector<MeasurementVector> measurements;
  std::vector<std::size_t> skipped;
  std::vector<std::string> warnings;
};

// curves holds one curve per panel date, or a single curve used throughout.
FilterResult run_filter(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                        const ModelConfig& config, const Theta& theta,
                        FilterMode mode = FilterMode::truncated);

// Gaussian spread-space log-density of the quotes along a given x path.
double naive_measurement_loglik(const CdsPanel& panel, std::span<const ZeroCurve> curves,
                                const ModelConfig& config, const Theta& theta,
                                std::span<const double> x_path);

}  // namespace tcbm
