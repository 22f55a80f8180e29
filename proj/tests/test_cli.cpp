#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "tcbm/filter.hpp"
#include "tcbm/pricing.hpp"

using namespace tcbm;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(TCBM_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("tcbm_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Cli, PriceMatchesLibrary) {
  const CliRun r = run("price --x 0.7 --model vg");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,tenor_years,spread_bp");
  const ModelConfig m;
  const Theta th;
  int rows = 0;
  while (std::getline(in, line)) {
    double x = 0, tenor = 0, bp = 0;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &tenor, &bp), 3);
    const double f = cds_spread(m.time_change(th.c), m.risk_neutral(th.beta_q), ZeroCurve::flat(0.03),
                                {tenor, m.premium_dt, th.recovery}, 0.7);
    EXPECT_NEAR(bp * 1e-4, f, 1e-12) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 7);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("price --x 0.7 --model nonsense").code, 2);
  EXPECT_EQ(run("calibrate --cds /nonexistent.csv").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("price --x 0.7 --eta 100").code, 2);  // outside the bounds
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, SimulateIsDeterministicAndFilterRuns) {
  const fs::path a = scratch("a"), b = scratch("b");
  ASSERT_EQ(run("simulate --weeks 30 --seed 5 --out-dir " + a.string()).code, 0);
  ASSERT_EQ(run("simulate --weeks 30 --seed 5 --out-dir " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "panel.csv"), slurp(b / "panel.csv"));
  EXPECT_EQ(slurp(a / "truth.csv"), slurp(b / "truth.csv"));

  const std::string panel = (a / "panel.csv").string();
  ASSERT_EQ(run("filter --set filter_mode=kalman --cds " + panel + " --out-dir " + a.string()).code, 0);
  ASSERT_EQ(run("filter --set filter_mode=kalman --eta 2 --cds " + panel + " --out-dir " + b.string()).code, 0);
  const std::string f = slurp(a / "filter.csv");
  EXPECT_EQ(f.substr(0, f.find('\n')), "date,x_mode,x_mean,x_sd,x_lo90,x_hi90,loglik_t");
  const CliRun v = run("vuong " + (a / "filter.csv").string() + " " + (b / "filter.csv").string());
  ASSERT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("\"statistic\""), std::string::npos);
  EXPECT_NE(v.out.find("\"lag\": 3"), std::string::npos);  // M = 30
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const fs::path d = scratch("cfg");
  std::ofstream(d / "run.cfg") << "model = exp\ntenors = [5]\nR0 = 0.3\n";
  const CliRun from_file = run("price --x 0.5 --config " + (d / "run.cfg").string());
  const CliRun flag = run("price --x 0.5 --R 0.5 --config " + (d / "run.cfg").string());
  ASSERT_EQ(from_file.code, 0);
  ASSERT_EQ(flag.code, 0);
  const ModelConfig m{TimeChangeKind::exponential};
  for (const auto& [r, recovery] : {std::pair{from_file, 0.3}, std::pair{flag, 0.5}}) {
    double x = 0, tenor = 0, bp = 0;
    ASSERT_EQ(std::sscanf(r.out.c_str() + r.out.find('\n') + 1, "%lf,%lf,%lf", &x, &tenor, &bp), 3);
    const double f = cds_spread(m.time_change(1.0), m.risk_neutral(-1.5), ZeroCurve::flat(0.03),
                                {5.0, m.premium_dt, recovery}, 0.5);
    EXPECT_NEAR(bp * 1e-4, f, 1e-12);
  }
}
