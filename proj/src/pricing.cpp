#include "tcbm/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {
namespace {

constexpr double kMinAnnuity = 1e-12;
constexpr int kMaxNewton = 100;

std::vector<double> premium_horizons(double dt, std::size_t count) {
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = dt * static_cast<double>(k + 1);
  return t;
}

}  // namespace

std::size_t CdsContractSpec::periods() const {
  validate();
  return static_cast<std::size_t>(std::lround(tenor / premium_dt));
}

void CdsContractSpec::validate() const {
  if (!(premium_dt > 0.0)) throw DomainError("CDS premium interval must be positive");
  if (!(tenor > 0.0)) throw DomainError("CDS tenor must be positive");
  const double n = tenor / premium_dt;
  if (std::abs(n - std::round(n)) > 1e-9 || std::round(n) < 1.0)
    throw DomainError("CDS tenor must be a whole number of premium intervals");
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw DomainError("recovery must lie in [0, 1]");
}

// ---------------------------------------------------------------------------

SurvivalSet::SurvivalSet(const TimeChangeSpec& spec, const TcbmParams& params_q, double premium_dt,
                         std::size_t count, const FftGrid& grid, bool parallel, double eps)
    : premium_dt_(premium_dt), grid_(grid) {
  if (!(premium_dt > 0.0)) throw DomainError("premium interval must be positive");
  if (count == 0) throw DomainError("survival set needs at least one horizon");
  const LatticeEngine engine(spec, params_q, grid, eps);
  const auto horizons = premium_horizons(premium_dt, count);
  curves_ = parallel ? engine.survival_batch(horizons) : engine.survival_batch_serial(horizons);
}

FftGrid SurvivalSet::default_grid(const TimeChangeSpec& spec, const TcbmParams& params_q,
                                  double premium_dt, double x_range, double eps) {
  TcbmParams p = params_q;
  p.x = x_range;
  return choose_grid(spec, p, premium_dt, eps);
}

const SurvivalCurve& SurvivalSet::at(std::size_t k) const {
  if (k == 0 || k > curves_.size()) throw DomainError("survival set: premium date out of range");
  return curves_[k - 1];
}

// ---------------------------------------------------------------------------

CdsPricer::CdsPricer(std::shared_ptr<const SurvivalSet> survival, const ZeroCurve& curve,
                     const CdsContractSpec& contract)
    : set_(std::move(survival)), contract_(contract), n_(contract.periods()) {
  if (!set_) throw DomainError("CDS pricer needs survival curves");
  if (std::abs(set_->premium_dt() - contract.premium_dt) > 1e-12)
    throw DomainError("CDS pricer: premium interval differs from the survival set");
  if (n_ > set_->count()) throw DomainError("CDS pricer: survival set too short for the tenor");
  discount_.resize(n_);
  for (std::size_t k = 1; k <= n_; ++k)
    discount_[k - 1] = curve.discount(contract.premium_dt * static_cast<double>(k));
}

template <class Survival>
double CdsPricer::ratio(Survival&& p) const {
  double protection = 0.0;
  double annuity = 0.0;
  double prev = 0.0;
  for (std::size_t k = 1; k <= n_; ++k) {
    const double pk = p(k);
    const double bk = discount_[k - 1];
    annuity += pk * bk;
    if (k < n_) protection += (1.0 - pk) * (bk - discount_[k]);
    prev = pk;
  }
  protection += discount_[n_ - 1] * (1.0 - prev);
  annuity *= contract_.premium_dt;
  if (!(annuity >= kMinAnnuity))
    throw DomainError("CDS spread: x too close to default for quotation");
  return (1.0 - contract_.recovery) * protection / annuity;
}

double CdsPricer::spread(double x) const {
  return ratio([&](std::size_t k) { return set_->at(k).value_at(x); });
}

double CdsPricer::spread_at_node(std::size_t l) const {
  if (l >= set_->nodes()) throw DomainError("CDS spread: lattice node out of range");
  return ratio([&](std::size_t k) { return set_->at(k).values()[l]; });
}

double CdsPricer::slope(double x) const {
  if (!(x > 0.0 && x < x_max())) throw RangeError("CDS slope: x outside the lattice interior", 0.0, x_max());
  double protection = 0.0, d_protection = 0.0;
  double annuity = 0.0, d_annuity = 0.0;
  for (std::size_t k = 1; k <= n_; ++k) {
    const SurvivalCurve& c = set_->at(k);
    const double pk = c.value_at(x);
    const double dk = c.slope_at(x);
    const double bk = discount_[k - 1];
    annuity += pk * bk;
    d_annuity += dk * bk;
    const double weight = k < n_ ? bk - discount_[k] : bk;
    protection += (1.0 - pk) * weight;
    d_protection -= dk * weight;
  }
  annuity *= contract_.premium_dt;
  d_annuity *= contract_.premium_dt;
  if (!(annuity >= kMinAnnuity))
    throw DomainError("CDS slope: x too close to default for quotation");
  return (1.0 - contract_.recovery) * (d_protection * annuity - protection * d_annuity) /
         (annuity * annuity);
}

std::vector<double> CdsPricer::lattice() const {
  const long count = static_cast<long>(set_->nodes()) - 1;
  std::vector<double> out(static_cast<std::size_t>(count));
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = spread_at_node(static_cast<std::size_t>(i) + 1);
    } catch (...) {
#pragma omp critical(tcbm_cds_lattice)
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<double> CdsPricer::lattice_serial() const {
  std::vector<double> out;
  out.reserve(set_->nodes() - 1);
  for (std::size_t l = 1; l < set_->nodes(); ++l) out.push_back(spread_at_node(l));
  return out;
}

double CdsPricer::invert(double y) const {
  const std::size_t last = set_->nodes() - 1;
  const double top = spread_at_node(1);
  const double bottom = spread_at_node(last);
  if (!(y <= top && y >= bottom))
    throw RangeError("invert_cds: spread outside the attainable range", bottom, top);

  // Bracket on lattice nodes: F(x_lo) >= y >= F(x_hi).
  std::size_t lo = 1, hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (spread_at_node(mid) >= y ? lo : hi) = mid;
  }
  const double step = set_->step();
  double a = step * static_cast<double>(lo);
  double b = step * static_cast<double>(hi);
  double fa = spread_at_node(lo) - y;
  double fb = spread_at_node(hi) - y;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;

  // Safeguarded Newton on the interpolant inside the cell.
  double x = a + fa / (fa - fb) * (b - a);
  const double tol = 1e-15 * std::max(1.0, y);
  for (int it = 0; it < kMaxNewton; ++it) {
    const double f = spread(x) - y;
    if (std::abs(f) <= tol) return x;
    if (f > 0.0) {
      a = x;
      fa = f;
    } else {
      b = x;
      fb = f;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) return x;
    const double d = slope(x);
    double next = d < 0.0 ? x - f / d : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------

double defaultable_bond(const TimeChangeSpec& spec, const TcbmParams& params_q,
                        const ZeroCurve& curve, double recovery, double maturity) {
  if (!(maturity > 0.0)) throw DomainError("defaultable bond: maturity must be positive");
  if (!(recovery >= 0.0 && recovery <= 1.0)) throw DomainError("recovery must lie in [0, 1]");
  const double p = survival_at(spec, params_q, maturity, params_q.x);
  return curve.discount(maturity) * (p + recovery * (1.0 - p));
}

namespace {

CdsPricer make_pricer(const TimeChangeSpec& spec, const TcbmParams& params_q,
                      const ZeroCurve& curve, const CdsContractSpec& contract,
                      const FftGrid& grid) {
  auto set = std::make_shared<const SurvivalSet>(spec, params_q, contract.premium_dt,
                                                 contract.periods(), grid);
  return CdsPricer(std::move(set), curve, contract);
}

FftGrid grid_for(const TimeChangeSpec& spec, const TcbmParams& params_q,
                 const CdsContractSpec& contract, double x) {
  return SurvivalSet::default_grid(spec, params_q, contract.premium_dt,
                                   std::max(kPricingXRange, x + 1.0));
}

}  // namespace

double cds_spread(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double x, const FftGrid& grid) {
  if (!(x > 0.0)) throw DomainError("CDS spread: x must be positive");
  return make_pricer(spec, params_q, curve, contract, grid).spread(x);
}

double cds_spread(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double x) {
  return cds_spread(spec, params_q, curve, contract, x, grid_for(spec, params_q, contract, x));
}

LatticeSpreads cds_curve_on_lattice(const TimeChangeSpec& spec, const TcbmParams& params_q,
                                    const ZeroCurve& curve, const CdsContractSpec& contract,
                                    const FftGrid& grid) {
  const CdsPricer pricer = make_pricer(spec, params_q, curve, contract, grid);
  LatticeSpreads out;
  out.spread = pricer.lattice();
  out.x.resize(out.spread.size());
  for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] = grid.x(i + 1);
  return out;
}

double invert_cds(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                  const CdsContractSpec& contract, double y) {
  return make_pricer(spec, params_q, curve, contract, grid_for(spec, params_q, contract, 0.0))
      .invert(y);
}

double cds_slope(const TimeChangeSpec& spec, const TcbmParams& params_q, const ZeroCurve& curve,
                 const CdsContractSpec& contract, double x) {
  return make_pricer(spec, params_q, curve, contract, grid_for(spec, params_q, contract, x))
      .slope(x);
}

}  // namespace tcbm
