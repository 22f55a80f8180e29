#pragma once

#include <string>
#include <vector>

namespace tcbm {

inline constexpr double kMaxCurveMaturity = 30.0;

// Continuously compounded zero yields at increasing pillar maturities (years).
// Yields are linear in maturity between pillars and flat beyond the ends.
class ZeroCurve {
 public:
  ZeroCurve() = default;
  ZeroCurve(std::string asof, std::vector<double> maturities, std::vector<double> yields);

  static ZeroCurve flat(double rate, std::string asof = {});

  const std::string& asof() const noexcept { return asof_; }
  const std::vector<double>& maturities() const noexcept { return maturities_; }
  const std::vector<double>& yields() const noexcept { return yields_; }

  double yield(double t) const;
  double discount(double t) const;

 private:
  std::string asof_;
  std::vector<double> maturities_;
  std::vector<double> yields_;
};

double discount(const ZeroCurve& curve, double t);

}  // namespace tcbm
