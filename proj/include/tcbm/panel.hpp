#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tcbm {

// Days since 1970-01-01 for an ISO-8601 calendar date (YYYY-MM-DD).
int days_from_iso(const std::string& date);
std::string iso_from_days(int days);

// Year fraction between two dates on a 364-day year, so one week is 1/52.
double year_fraction(int from_days, int to_days);

// Weekly CDS quotes: M dates by K tenors, spreads as decimals per annum.
// Missing quotes are NaN in all three arrays.
struct CdsPanel {
  std::vector<std::string> dates;
  std::vector<double> tenors;
  std::vector<double> bid;  // row-major M x K
  std::vector<double> mid;
  std::vector<double> ask;
  std::vector<char> survived;  // no-default flag per date

  CdsPanel() = default;
  CdsPanel(std::vector<std::string> dates, std::vector<double> tenors);

  std::size_t size() const noexcept { return dates.size(); }
  std::size_t tenor_count() const noexcept { return tenors.size(); }
  std::size_t index(std::size_t t, std::size_t k) const noexcept { return t * tenors.size() + k; }

  bool has(std::size_t t, std::size_t k) const;
  double mid_at(std::size_t t, std::size_t k) const { return mid[index(t, k)]; }
  double width_at(std::size_t t, std::size_t k) const { return ask[index(t, k)] - bid[index(t, k)]; }
  void set(std::size_t t, std::size_t k, double bid, double mid, double ask);

  // Year fractions between consecutive dates (size M - 1).
  std::vector<double> steps() const;
  // Throws DataError on ordering, quote or shape violations.
  void validate() const;
  // Panel restricted to the first m dates.
  CdsPanel head(std::size_t m) const;
};

}  // namespace tcbm
