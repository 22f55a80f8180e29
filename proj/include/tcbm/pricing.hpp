#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "tcbm/firstpassage.hpp"
#include "tcbm/timechange.hpp"
#include "tcbm/zero_curve.hpp"

namespace tcbm {

// Largest log-leverage the pricing lattice is sized to cover by default.
inline constexpr double kPricingXRange = 3.0;
inline constexpr double kDefaultPremiumDt = 0.25;

struct CdsContractSpec {
  double tenor = 5.0;
  double premium_dt = kDefaultPremiumDt;
  double recovery = 0.4;

  std::size_t periods() const;  // N with tenor = N * premium_dt
  void validate() const;
};

// Survival curves at t_k = k * premium_dt, k = 1..count, all on one lattice.
class SurvivalSet {
 public:
  SurvivalSet(const TimeChangeSpec& spec, const TcbmParams& params_q, double premium_dt,
              std::size_t count, const FftGrid& grid, bool parallel = true,
              double eps = kDefaultFftEps);

  // Grid sized for the shortest horizon and starting points up to x_range.
  static FftGrid default_grid(const TimeChangeSpec& spec, const TcbmParams& params_q,
                              double premium_dt, double x_range = kPricingXRange,
                              double eps = kDefaultFftEps);

  double premium_dt() const noexcept { return premium_dt_; }
  std::size_t count() const noexcept { return curves_.size(); }
  const FftGrid& grid() const noexcept { return grid_; }
  const SurvivalCurve& at(std::size_t k) const;  // k in 1..count
  double step() const noexcept { return grid_.eta_star(); }
  std::size_t nodes() const noexcept { return curves_.front().nodes(); }
  double x_valid() const noexcept { return curves_.front().x_valid(); }

 private:
  double premium_dt_;
  FftGrid grid_;
  std::vector<SurvivalCurve> curves_;
};

// Par spread F(x), its x-derivative and inverse for one contract on one date.
class CdsPricer {
 public:
  CdsPricer(std::shared_ptr<const SurvivalSet> survival, const ZeroCurve& curve,
            const CdsContractSpec& contract);

  const CdsContractSpec& contract() const noexcept { return contract_; }
  // Attainable x range: first interior lattice node up to the valid extent.
  double x_min() const noexcept { return set_->step(); }
  double x_max() const noexcept { return set_->x_valid(); }

  double spread(double x) const;
  // True derivative dF/dx (negative); the measurement scheme uses its magnitude.
  double slope(double x) const;
  double spread_at_node(std::size_t l) const;
  // Spreads at lattice nodes 1 .. nodes-1 (node 0 is the barrier).
  std::vector<double> lattice() const;
  std::vector<double> lattice_serial() const;
  // Solves F(x) = y; RangeError carrying the attainable spread bounds.
  double invert(double y) const;

 private:
  template <class Survival>
  double ratio(Survival&& p) const;

  std::shared_ptr<const SurvivalSet> set_;
  CdsContractSpec contract_;
  std::size_t n_;
  std::vector<double> discount_;  // B(t_k), k = 1..N at index k - 1
};

double defaultable_bond(const TimeChangeSpec& spec, const TcbmParams& params_q,
                        const ZeroCurve& curve, double recovery, double maturity);

double cds_spread(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double x);
double cds_spread(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double x, const FftGrid& grid);

struct LatticeSpreads {
  std::vector<double> x;
  std::vector<double> spread;
};
LatticeSpreads cds_curve_on_lattice(const TimeChangeSpec& spec, const TcbmParams& params_q,
                                    const ZeroCurve& curve, const CdsContractSpec& contract,
                                    const FftGrid& grid);

double invert_cds(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double y);
double cds_slope(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                 const CdsContractSpec& contract, double x);

}  // namespace tcbm
