#include "tcbm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tcbm/errors.hpp"

namespace tcbm {

namespace {

constexpr double kBp = 1e-4;
constexpr double kMaxYieldPct = 50.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DataError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  return v;
}

void expect_header(std::istream& in, const std::string& header, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(what + ": file is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::string joined;
  for (const auto& f : split(line)) joined += (joined.empty() ? "" : ",") + f;
  if (joined != header) throw DataError(what + ": expected header '" + header + "', got '" + line + "'");
}

std::ifstream open(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  return f;
}

}  // namespace

double tenor_from_token(const std::string& token) {
  if (token.size() < 2) throw DataError("bad tenor token '" + token + "'");
  const char unit = token.back();
  const double n = parse_number(token.substr(0, token.size() - 1), 0);
  if (!(n > 0.0)) throw DataError("bad tenor token '" + token + "'");
  if (unit == 'm') return n / 12.0;
  if (unit == 'y') return n;
  throw DataError("bad tenor token '" + token + "'");
}

CdsPanel read_cds(std::istream& in, const std::vector<double>& tenors,
                  std::vector<std::string>& warnings) {
  if (tenors.empty()) throw DataError("CDS ingest: no tenors configured");
  expect_header(in, "date,tenor_years,bid_bp,mid_bp,ask_bp", "CDS file");

  struct Quote {
    double bid, mid, ask;
  };
  std::map<int, std::map<std::size_t, Quote>> rows;
  std::map<int, std::string> names;
  std::set<double> ignored;
  std::string line;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 5)
      throw DataError("CDS file line " + std::to_string(number) + ": expected 5 fields");
    const int day = days_from_iso(f[0]);
    const double tenor = parse_number(f[1], number);
    const Quote q{parse_number(f[2], number), parse_number(f[3], number), parse_number(f[4], number)};
    const auto it = std::find_if(tenors.begin(), tenors.end(),
                                 [&](double k) { return std::abs(k - tenor) < 1e-9; });
    if (it == tenors.end()) {
      ignored.insert(tenor);
      continue;
    }
    if (!(q.bid <= q.mid && q.mid <= q.ask && q.ask > q.bid) || !(q.bid >= 0.0)) {
      warnings.push_back("CDS file line " + std::to_string(number) +
                         ": rejected, quotes violate bid <= mid <= ask with positive width");
      continue;
    }
    const auto k = static_cast<std::size_t>(it - tenors.begin());
    auto& row = rows[day];
    if (row.count(k))
      throw DataError("CDS file line " + std::to_string(number) + ": duplicate quote for " + f[0] +
                      " tenor " + f[1]);
    row[k] = {q.bid * kBp, q.mid * kBp, q.ask * kBp};
    names[day] = f[0];
  }
  for (double t : ignored) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", t);
    warnings.push_back(std::string("CDS file: tenor ") + buf + "y is not configured; ignored");
  }
  if (rows.empty()) throw DataError("CDS file holds no usable quotes");

  std::vector<std::string> dates;
  for (const auto& [day, name] : names) dates.push_back(name);
  CdsPanel panel(dates, tenors);
  std::size_t t = 0;
  int prev = 0;
  for (const auto& [day, row] : rows) {
    if (t > 0 && day - prev != 7)
      warnings.push_back("CDS file: " + names.at(day) + " is " + std::to_string(day - prev) +
                         " days after the previous date");
    for (const auto& [k, q] : row) panel.set(t, k, q.bid, q.mid, q.ask);
    prev = day;
    ++t;
  }
  panel.validate();
  return panel;
}

CdsPanel ingest_cds(const std::string& path, const std::vector<double>& tenors,
                    std::vector<std::string>& warnings) {
  auto f = open(path);
  return read_cds(f, tenors, warnings);
}

void write_cds(std::ostream& out, const CdsPanel& panel) {
  out << "date,tenor_years,bid_bp,mid_bp,ask_bp\n";
  for (std::size_t t = 0; t < panel.size(); ++t)
    for (std::size_t k = 0; k < panel.tenor_count(); ++k) {
      if (!panel.has(t, k)) continue;
      const std::size_t i = panel.index(t, k);
      out << panel.dates[t] << ',' << format_number(panel.tenors[k]) << ','
          << format_number(panel.bid[i] / kBp) << ',' << format_number(panel.mid[i] / kBp) << ','
          << format_number(panel.ask[i] / kBp) << '\n';
    }
}

std::vector<ZeroCurve> read_treasury(std::istream& in, std::vector<std::string>& warnings) {
  expect_header(in, "date,tenor,zero_yield_pct", "treasury file");
  std::map<int, std::map<double, double>> rows;
  std::map<int, std::string> names;
  std::string line;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto f = split(line);
    if (f.size() != 3)
      throw DataError("treasury file line " + std::to_string(number) + ": expected 3 fields");
    const int day = days_from_iso(f[0]);
    if (std::find(kTreasuryTokens.begin(), kTreasuryTokens.end(), f[1]) == kTreasuryTokens.end())
      throw DataError("treasury file line " + std::to_string(number) + ": unknown tenor '" + f[1] + "'");
    const double pct = parse_number(f[2], number);
    if (!(std::abs(pct) <= kMaxYieldPct))
      throw DataError("treasury file line " + std::to_string(number) + ": yield " + f[2] +
                      " rejected, yields must be <= 50 (%)");
    auto& row = rows[day];
    const double m = tenor_from_token(f[1]);
    if (row.count(m))
      throw DataError("treasury file line " + std::to_string(number) + ": duplicate pillar " + f[1] +
                      " on " + f[0]);
    row[m] = pct / 100.0;
    names[day] = f[0];
  }
  if (rows.empty()) throw DataError("treasury file holds no yields");

  std::vector<ZeroCurve> out;
  for (const auto& [day, row] : rows) {
    std::string missing;
    for (const auto& tok : kTreasuryTokens)
      if (!row.count(tenor_from_token(tok))) missing += " " + tok;
    if (!missing.empty())
      warnings.push_back("treasury " + names.at(day) + ": missing pillars" + missing +
                         "; curve built from the rest");
    std::vector<double> m, y;
    for (const auto& [mat, yield] : row) {
      m.push_back(mat);
      y.push_back(yield);
    }
    out.emplace_back(names.at(day), std::move(m), std::move(y));
  }
  return out;
}

std::vector<ZeroCurve> ingest_treasury(const std::string& path, std::vector<std::string>& warnings) {
  auto f = open(path);
  return read_treasury(f, warnings);
}

std::vector<ZeroCurve> curves_for_panel(const std::vector<ZeroCurve>& series,
                                        const CdsPanel& panel, std::vector<std::string>& warnings) {
  if (series.empty()) throw DataError("no zero curves available");
  std::vector<int> days;
  for (const auto& c : series) days.push_back(days_from_iso(c.asof()));
  std::vector<ZeroCurve> out;
  for (const auto& date : panel.dates) {
    const int day = days_from_iso(date);
    const auto it = std::upper_bound(days.begin(), days.end(), day);
    if (it == days.begin()) throw DataError("no zero curve on or before " + date);
    const auto i = static_cast<std::size_t>(it - days.begin()) - 1;
    if (days[i] != day)
      warnings.push_back("no zero curve dated " + date + "; using " + series[i].asof());
    out.push_back(series[i]);
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace tcbm
