#include "tcbm/zero_curve.hpp"

#include <algorithm>
#include <cmath>

#include "tcbm/errors.hpp"

namespace tcbm {

ZeroCurve::ZeroCurve(std::string asof, std::vector<double> maturities, std::vector<double> yields)
    : asof_(std::move(asof)), maturities_(std::move(maturities)), yields_(std::move(yields)) {
  if (maturities_.empty() || maturities_.size() != yields_.size())
    throw DomainError("zero curve needs matching, nonempty maturities and yields");
  if (!(maturities_.front() > 0.0))
    throw DomainError("zero curve maturities must be positive");
  for (std::size_t i = 1; i < maturities_.size(); ++i)
    if (!(maturities_[i] > maturities_[i - 1]))
      throw DomainError("zero curve maturities must be strictly increasing");
  for (double y : yields_)
    if (!std::isfinite(y)) throw DomainError("zero curve yields must be finite");
}

ZeroCurve ZeroCurve::flat(double rate, std::string asof) {
  return ZeroCurve(std::move(asof), {1.0 / 12.0, kMaxCurveMaturity}, {rate, rate});
}

double ZeroCurve::yield(double t) const {
  if (!(t >= 0.0 && t <= kMaxCurveMaturity))
    throw DomainError("discount: maturity must lie in [0, 30] years");
  if (maturities_.empty()) throw DomainError("discount: empty zero curve");
  if (t <= maturities_.front()) return yields_.front();
  if (t >= maturities_.back()) return yields_.back();
  const auto hi = std::upper_bound(maturities_.begin(), maturities_.end(), t);
  const std::size_t j = static_cast<std::size_t>(hi - maturities_.begin());
  const double w = (t - maturities_[j - 1]) / (maturities_[j] - maturities_[j - 1]);
  return yields_[j - 1] + w * (yields_[j] - yields_[j - 1]);
}

double ZeroCurve::discount(double t) const {
  const double z = yield(t);
  return t == 0.0 ? 1.0 : std::exp(-z * t);
}

double discount(const ZeroCurve& curve, double t) { return curve.discount(t); }

}  // namespace tcbm
