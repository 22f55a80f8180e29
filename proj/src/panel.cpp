#include "tcbm/panel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tcbm/errors.hpp"

namespace tcbm {

int days_from_iso(const std::string& date) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (date.size() != 10 || std::sscanf(date.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3)
    throw DataError("not an ISO-8601 date: '" + date + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw DataError("invalid calendar date: '" + date + "'");
  return static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

std::string iso_from_days(int days) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

double year_fraction(int from_days, int to_days) {
  return static_cast<double>(to_days - from_days) / 364.0;
}

CdsPanel::CdsPanel(std::vector<std::string> d, std::vector<double> k)
    : dates(std::move(d)), tenors(std::move(k)) {
  const std::size_t n = dates.size() * tenors.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bid.assign(n, nan);
  mid.assign(n, nan);
  ask.assign(n, nan);
  survived.assign(dates.size(), 1);
}

bool CdsPanel::has(std::size_t t, std::size_t k) const {
  const std::size_t i = index(t, k);
  return std::isfinite(mid[i]) && std::isfinite(bid[i]) && std::isfinite(ask[i]);
}

void CdsPanel::set(std::size_t t, std::size_t k, double b, double m, double a) {
  const std::size_t i = index(t, k);
  bid[i] = b;
  mid[i] = m;
  ask[i] = a;
}

std::vector<double> CdsPanel::steps() const {
  std::vector<double> out;
  for (std::size_t t = 1; t < dates.size(); ++t)
    out.push_back(year_fraction(days_from_iso(dates[t - 1]), days_from_iso(dates[t])));
  return out;
}

void CdsPanel::validate() const {
  if (dates.empty()) throw DataError("CDS panel is empty");
  if (tenors.empty()) throw DataError("CDS panel has no tenors");
  const std::size_t n = dates.size() * tenors.size();
  if (bid.size() != n || mid.size() != n || ask.size() != n || survived.size() != dates.size())
    throw DataError("CDS panel arrays do not match its shape");
  int prev = std::numeric_limits<int>::min();
  for (const auto& d : dates) {
    const int day = days_from_iso(d);
    if (day <= prev) throw DataError("CDS panel dates must be strictly increasing: " + d);
    prev = day;
  }
  for (std::size_t t = 0; t < dates.size(); ++t) {
    for (std::size_t k = 0; k < tenors.size(); ++k) {
      if (!has(t, k)) continue;
      const std::size_t i = index(t, k);
      if (!(bid[i] <= mid[i] && mid[i] <= ask[i] && ask[i] > bid[i]))
        throw DataError("CDS quote violates bid <= mid <= ask with positive width on " + dates[t]);
    }
  }
}

CdsPanel CdsPanel::head(std::size_t m) const {
  m = std::min(m, dates.size());
  CdsPanel out(std::vector<std::string>(dates.begin(), dates.begin() + static_cast<long>(m)), tenors);
  const std::size_t n = m * tenors.size();
  std::copy_n(bid.begin(), n, out.bid.begin());
  std::copy_n(mid.begin(), n, out.mid.begin());
  std::copy_n(ask.begin(), n, out.ask.begin());
  std::copy_n(survived.begin(), m, out.survived.begin());
  return out;
}

}  // namespace tcbm
