#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tcbm/config.hpp"
#include "tcbm/errors.hpp"
#include "tcbm/io.hpp"

using namespace tcbm;

namespace {

const std::vector<double> kTenors{1, 2, 3, 4, 5, 7, 10};

std::string cds_file(std::size_t weeks) {
  std::ostringstream s;
  s << "date,tenor_years,bid_bp,mid_bp,ask_bp\n";
  int day = days_from_iso("2005-01-05");
  for (std::size_t t = 0; t < weeks; ++t, day += 7)
    for (double k : kTenors) s << iso_from_days(day) << ',' << k << ",100," << 102 + k << ",120\n";
  return s.str();
}

bool mentions(const std::vector<std::string>& w, const std::string& text) {
  for (const auto& s : w)
    if (s.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST(CdsIngest, WellFormedPanel) {
  std::istringstream in(cds_file(78));
  std::vector<std::string> warnings;
  const CdsPanel p = read_cds(in, kTenors, warnings);
  EXPECT_EQ(p.size(), 78u);
  EXPECT_EQ(p.tenor_count(), 7u);
  EXPECT_TRUE(warnings.empty());
  EXPECT_NEAR(p.mid_at(3, 6), 112e-4, 1e-15);
  EXPECT_NEAR(p.width_at(0, 0), 20e-4, 1e-15);
}

TEST(CdsIngest, RejectsCrossedRowWithLineNumber) {
  std::string text = cds_file(3);
  text += "2005-01-26,5,120,115,110\n";  // line 23
  std::istringstream in(text);
  std::vector<std::string> warnings;
  const CdsPanel p = read_cds(in, kTenors, warnings);
  EXPECT_EQ(p.size(), 3u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(mentions(warnings, "line 23")) << warnings[0];
}

TEST(CdsIngest, DuplicateIsAnError) {
  std::string text = cds_file(2) + "2005-01-12,3,100,104,110\n";
  std::istringstream in(text);
  std::vector<std::string> warnings;
  try {
    read_cds(in, kTenors, warnings);
    FAIL() << "duplicate accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2005-01-12"), std::string::npos) << e.what();
  }
}

TEST(CdsIngest, UnknownTenorIgnoredAndGapsNoted) {
  std::string text =
      "date,tenor_years,bid_bp,mid_bp,ask_bp\n"
      "2005-01-05,5,100,101,102\n"
      "2005-01-05,6,100,101,102\n"
      "2005-01-19,5,100,101,102\n";
  std::istringstream in(text);
  std::vector<std::string> warnings;
  const CdsPanel p = read_cds(in, kTenors, warnings);
  EXPECT_EQ(p.size(), 2u);
  EXPECT_FALSE(p.has(0, 0));
  EXPECT_TRUE(p.has(0, 4));
  EXPECT_TRUE(mentions(warnings, "tenor 6y"));
  EXPECT_TRUE(mentions(warnings, "14 days"));
}

TEST(CdsIngest, Failures) {
  std::vector<std::string> w;
  std::istringstream empty("");
  EXPECT_THROW(read_cds(empty, kTenors, w), DataError);
  std::istringstream header_only("date,tenor_years,bid_bp,mid_bp,ask_bp\n");
  EXPECT_THROW(read_cds(header_only, kTenors, w), DataError);
  std::istringstream wrong("date,tenor,bid,mid,ask\n2005-01-05,5,1,2,3\n");
  EXPECT_THROW(read_cds(wrong, kTenors, w), DataError);
  std::istringstream garbage("date,tenor_years,bid_bp,mid_bp,ask_bp\n2005-01-05,5,abc,2,3\n");
  EXPECT_THROW(read_cds(garbage, kTenors, w), DataError);
  EXPECT_THROW(ingest_cds("/nonexistent/cds.csv", kTenors, w), DataError);
}

TEST(CdsIngest, WriteReadRoundTrip) {
  CdsPanel p({"2005-01-05", "2005-01-12"}, {1.0, 5.0});
  p.set(0, 0, 0.0101, 0.0103, 0.0105);
  p.set(1, 1, 0.0201, 0.02033333, 0.0205);
  std::stringstream s;
  write_cds(s, p);
  std::vector<std::string> w;
  const CdsPanel q = read_cds(s, {1.0, 5.0}, w);
  EXPECT_EQ(q.dates, p.dates);
  EXPECT_FALSE(q.has(0, 1));
  EXPECT_NEAR(q.mid_at(1, 1), 0.02033333, 1e-15);
}

TEST(Treasury, FlatCurveDiscount) {
  std::ostringstream s;
  s << "date,tenor,zero_yield_pct\n";
  for (const char* d : {"2005-01-05", "2005-01-12"})
    for (const auto& tok : kTreasuryTokens) s << d << ',' << tok << ",3\n";
  std::istringstream in(s.str());
  std::vector<std::string> w;
  const auto curves = read_treasury(in, w);
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_TRUE(w.empty());
  for (const auto& c : curves) EXPECT_NEAR(c.discount(2.0), std::exp(-0.06), 1e-15);
  EXPECT_NEAR(tenor_from_token("3m"), 0.25, 1e-15);
  EXPECT_EQ(tenor_from_token("20y"), 20.0);
}

TEST(Treasury, MissingPillarWarns) {
  std::ostringstream s;
  s << "date,tenor,zero_yield_pct\n";
  for (const auto& tok : kTreasuryTokens)
    if (tok != "20y") s << "2005-01-05," << tok << ",4\n";
  std::istringstream in(s.str());
  std::vector<std::string> w;
  const auto curves = read_treasury(in, w);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_EQ(curves[0].maturities().size(), 10u);
  EXPECT_TRUE(mentions(w, "20y"));
}

TEST(Treasury, BasisPointYieldRejected) {
  std::istringstream in("date,tenor,zero_yield_pct\n2005-01-05,5y,300\n");
  std::vector<std::string> w;
  EXPECT_THROW(read_treasury(in, w), DataError);
  std::istringstream bad_token("date,tenor,zero_yield_pct\n2005-01-05,4y,3\n");
  EXPECT_THROW(read_treasury(bad_token, w), DataError);
}

TEST(Treasury, NearestPriorCurve) {
  const std::vector<ZeroCurve> series{ZeroCurve::flat(0.02, "2005-01-05"),
                                      ZeroCurve::flat(0.04, "2005-01-12")};
  CdsPanel p({"2005-01-05", "2005-01-19"}, {5.0});
  std::vector<std::string> w;
  const auto curves = curves_for_panel(series, p, w);
  EXPECT_EQ(curves[0].yield(1.0), 0.02);
  EXPECT_EQ(curves[1].yield(1.0), 0.04);
  EXPECT_TRUE(mentions(w, "2005-01-19"));
  CdsPanel early({"2004-12-29"}, {5.0});
  EXPECT_THROW(curves_for_panel(series, early, w), DataError);
}

TEST(Config, DefaultsAreTheFrozenSetup) {
  const RunConfig c;
  EXPECT_EQ(c.sigma, 0.3);
  EXPECT_EQ(c.beta, -0.5);
  EXPECT_EQ(c.b, 0.2);
  EXPECT_EQ(c.model, TimeChangeKind::variance_gamma);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesKeysAndSections) {
  std::istringstream in(
      "# run\n"
      "model = blackcox\n"
      "sigma = 0.25  # frozen\n"
      "tenors = [1, 5, 10]\n"
      "filter_mode = kalman\n"
      "seed = 7\n"
      "eta0 = 2\n"
      "bounds.R = 0.1, 0.9\n"
      "[bounds]\n"
      "eta = [0.5, 5]\n");
  const RunConfig c = parse_config(in);
  EXPECT_EQ(c.model, TimeChangeKind::brownian);
  EXPECT_EQ(c.sigma, 0.25);
  EXPECT_EQ(c.tenors, (std::vector<double>{1, 5, 10}));
  EXPECT_EQ(c.filter_mode, FilterMode::kalman);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.init.eta, 2.0);
  EXPECT_EQ(c.bounds.lower.recovery, 0.1);
  EXPECT_EQ(c.bounds.upper.eta, 5.0);
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.model_config().sigma, 0.25);
}

TEST(Config, Rejections) {
  std::istringstream unknown("gamma = 1\n");
  EXPECT_THROW(parse_config(unknown), DataError);
  std::istringstream bad("sigma = fast\n");
  EXPECT_THROW(parse_config(bad), DataError);
  RunConfig c;
  c.set("bounds.eta", "5, 1");
  EXPECT_THROW(c.validate(), DataError);
  RunConfig d;
  d.set("eta0", "50");
  EXPECT_THROW(d.validate(), DataError);
  RunConfig e;
  e.set("cds", "/nonexistent/file.csv");
  EXPECT_THROW(e.validate(), DataError);
}

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.5), "2.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}
