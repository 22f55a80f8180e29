#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tcbm/panel.hpp"
#include "tcbm/zero_curve.hpp"

namespace tcbm {

// Maturities of the treasury pillars, in the order of the tokens below.
inline const std::vector<std::string> kTreasuryTokens{"1m", "3m", "6m", "1y", "2y", "3y",
                                                      "5y", "7y", "10y", "20y", "30y"};

// Years for a token like 3m or 10y.
double tenor_from_token(const std::string& token);

// CSV with header date,tenor_years,bid_bp,mid_bp,ask_bp. Spreads come back in
// decimals. Rows with bid > mid or mid > ask are dropped with a warning that
// names the line; tenors outside the set are ignored with a warning.
CdsPanel read_cds(std::istream& in, const std::vector<double>& tenors,
                  std::vector<std::string>& warnings);
CdsPanel ingest_cds(const std::string& path, const std::vector<double>& tenors,
                    std::vector<std::string>& warnings);
void write_cds(std::ostream& out, const CdsPanel& panel);

// CSV with header date,tenor,zero_yield_pct. One curve per date, sorted.
std::vector<ZeroCurve> read_treasury(std::istream& in, std::vector<std::string>& warnings);
std::vector<ZeroCurve> ingest_treasury(const std::string& path, std::vector<std::string>& warnings);

// One curve per panel date: the latest curve dated on or before it.
std::vector<ZeroCurve> curves_for_panel(const std::vector<ZeroCurve>& series,
                                        const CdsPanel& panel, std::vector<std::string>& warnings);

// Fixed formatting used by every output file.
std::string format_number(double v);

}  // namespace tcbm
