// Batch front end: price, calibrate, filter, simulate, vuong.
#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "tcbm/config.hpp"
#include "tcbm/errors.hpp"
#include "tcbm/estimation.hpp"
#include "tcbm/filter.hpp"
#include "tcbm/io.hpp"
#include "tcbm/pricing.hpp"
#include "tcbm/simulate.hpp"

using namespace tcbm;
using json = nlohmann::ordered_json;

namespace {

constexpr double kBp = 1e-4;

struct Common {
  std::string config_path;
  std::vector<std::string> sets;  // key=value overrides
  std::string model;
  int threads = -1;
  std::string cds;
  std::string treasury;
  double rate = std::nan("");
  std::string out_dir;
  std::map<std::string, double> theta;  // c, betaQ, R, eta flags
};

// 12 significant digits, as in the CSV files.
double rounded(double v) { return std::isfinite(v) ? std::stod(format_number(v)) : v; }

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return rounded(v);
}

void warn(const std::vector<std::string>& w) {
  for (const auto& s : w) std::cerr << "warning: " << s << '\n';
}

RunConfig resolve(const Common& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw DataError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.model.empty()) cfg.model = parse_model(o.model);
  if (o.threads >= 0) cfg.threads = o.threads;
  if (!o.cds.empty()) cfg.cds_path = o.cds;
  if (!o.treasury.empty()) cfg.treasury_path = o.treasury;
  if (std::isfinite(o.rate)) cfg.flat_rate = o.rate;
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  for (const auto& [k, v] : o.theta) {
    if (k == "c") cfg.init.c = v;
    if (k == "betaQ") cfg.init.beta_q = v;
    if (k == "R") cfg.init.recovery = v;
    if (k == "eta") cfg.init.eta = v;
  }
  cfg.validate();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  return cfg;
}

void add_common(CLI::App* app, Common& o, bool data) {
  app->add_option("--config", o.config_path, "Run configuration (key = value)")->check(CLI::ExistingFile);
  app->add_option("--set", o.sets, "Override a configuration key, key=value");
  app->add_option("--model", o.model, "vg, exp or blackcox");
  app->add_option("--threads", o.threads, "Worker thread cap (0: default)");
  app->add_option("--rate", o.rate, "Flat continuously compounded rate (decimal) when no treasury file");
  app->add_option("--treasury", o.treasury, "Zero curve CSV: date,tenor,zero_yield_pct");
  app->add_option("--out-dir", o.out_dir, "Output directory");
  if (data) app->add_option("--cds", o.cds, "CDS CSV: date,tenor_years,bid_bp,mid_bp,ask_bp");
  for (const char* k : {"c", "betaQ", "R", "eta"}) {
    app->add_option_function<double>(std::string("--") + k,
                                     [&o, k](double v) { o.theta[k] = v; },
                                     std::string("Value of ") + k + " (initial value for calibrate)");
  }
}

std::vector<ZeroCurve> curves_for(const RunConfig& cfg, const CdsPanel& panel) {
  if (cfg.treasury_path.empty()) return {ZeroCurve::flat(cfg.flat_rate)};
  std::vector<std::string> w;
  const auto series = ingest_treasury(cfg.treasury_path, w);
  auto curves = curves_for_panel(series, panel, w);
  warn(w);
  return curves;
}

CdsPanel load_panel(const RunConfig& cfg) {
  if (cfg.cds_path.empty()) throw DataError("no CDS file given (--cds or cds = ... in the config)");
  std::vector<std::string> w;
  CdsPanel p = ingest_cds(cfg.cds_path, cfg.tenors, w);
  warn(w);
  return p;
}

std::ofstream create(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  const auto path = std::filesystem::path(cfg.output_dir) / name;
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

json theta_json(const Theta& t) {
  return {{"c", number(t.c)}, {"beta_q", number(t.beta_q)}, {"recovery", number(t.recovery)},
          {"eta", number(t.eta)}};
}

Theta theta_from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  json j;
  try {
    j = json::parse(f);
    const auto& t = j.at("theta");
    return {t.at("c").get<double>(), t.at("beta_q").get<double>(), t.at("recovery").get<double>(),
            t.at("eta").get<double>()};
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

// --- verbs ---

int run_price(const Common& o, const std::vector<double>& xs, const std::string& date, const std::string& out) {
  const RunConfig cfg = resolve(o);
  const ModelConfig m = cfg.model_config();
  ZeroCurve curve = ZeroCurve::flat(cfg.flat_rate);
  if (!cfg.treasury_path.empty()) {
    std::vector<std::string> w;
    const auto series = ingest_treasury(cfg.treasury_path, w);
    CdsPanel one({date.empty() ? series.back().asof() : date}, {1.0});
    curve = curves_for_panel(series, one, w).front();
    warn(w);
  }
  std::ostringstream s;
  s << "x,tenor_years,spread_bp\n";
  for (double x : xs)
    for (double tenor : cfg.tenors) {
      const CdsContractSpec contract{tenor, cfg.premium_dt, cfg.init.recovery};
      const double f = cds_spread(m.time_change(cfg.init.c), m.risk_neutral(cfg.init.beta_q), curve,
                                  contract, x);
      s << format_number(x) << ',' << format_number(tenor) << ',' << format_number(f / kBp) << '\n';
    }
  if (out.empty()) {
    std::cout << s.str();
  } else {
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out);
    f << s.str();
  }
  return 0;
}

int run_calibrate(const Common& o, int max_evaluations) {
  const RunConfig cfg = resolve(o);
  const CdsPanel panel = load_panel(cfg);
  const auto curves = curves_for(cfg, panel);
  EstimationOptions opt;
  opt.mode = cfg.filter_mode;
  opt.bounds = cfg.bounds;
  if (max_evaluations > 0) opt.optimizer.max_evaluations = max_evaluations;
  const ModelConfig m = cfg.model_config();
  const EstimationResult r = maximize_likelihood(panel, curves, m, cfg.init, opt);
  warn(r.warnings);

  json j;
  j["model"] = model_token(cfg.model);
  j["filter_mode"] = cfg.filter_mode == FilterMode::truncated ? "truncated" : "kalman";
  j["frozen"] = {{"sigma", cfg.sigma}, {"beta", cfg.beta}, {"b", cfg.b}};
  j["theta"] = theta_json(r.theta_hat);
  json se = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) se[r.names[i]] = number(r.stderr_[i]);
  j["stderr"] = se;
  j["hessian_reliable"] = r.hessian_reliable;
  j["loglik"] = number(r.loglik);
  j["rmse_widths"] = number(r.rmse);
  j["x_av"] = number(r.path.x_av);
  j["x_std_annual"] = number(r.path.x_std);
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  json starts = json::array();
  for (const auto& s : r.starts)
    starts.push_back({{"start", theta_json(s.start)}, {"end", theta_json(s.end)},
                      {"loglik", number(s.loglik)}, {"converged", s.converged},
                      {"evaluations", s.evaluations}, {"message", s.message}});
  j["starts"] = starts;
  j["warnings"] = r.warnings;
  create(cfg, "calibration.json") << j.dump(2) << '\n';

  auto trace = create(cfg, "trace.csv");
  trace << "iteration,evaluations";
  for (const auto& n : r.names) trace << ',' << n;
  trace << ",loglik,gradient_norm\n";
  for (const auto& e : r.trace) {
    trace << e.iteration << ',' << e.evaluations;
    for (double v : e.x) trace << ',' << format_number(v);
    trace << ',' << format_number(e.value) << ',' << format_number(e.gradient_norm) << '\n';
  }
  std::printf("loglik %s  rmse %s  evaluations %d\n", format_number(r.loglik).c_str(),
              format_number(r.rmse).c_str(), r.evaluations);
  return 0;
}

int run_filter_verb(const Common& o, const std::string& theta_path) {
  const RunConfig cfg = resolve(o);
  Theta theta = cfg.init;
  if (!theta_path.empty()) theta = theta_from_file(theta_path);
  const CdsPanel panel = load_panel(cfg);
  const auto curves = curves_for(cfg, panel);
  const FilterResult r = run_filter(panel, curves, cfg.model_config(), theta, cfg.filter_mode);
  warn(r.warnings);
  const boost::math::normal unit;
  auto f = create(cfg, "filter.csv");
  f << "date,x_mode,x_mean,x_sd,x_lo90,x_hi90,loglik_t\n";
  for (std::size_t t = 0; t < panel.size(); ++t) {
    const FilterState& s = r.posterior[t];
    double lo = std::nan(""), hi = std::nan("");
    if (!s.diffuse) {
      // Quantiles of the represented posterior: the normal kernel, cut at 0 when truncated.
      const double sd = std::sqrt(s.var);
      const double p0 = s.mode == FilterMode::truncated ? boost::math::cdf(unit, -s.mean / sd) : 0.0;
      auto q = [&](double p) {
        const double u = std::clamp(p0 + p * (1.0 - p0), 1e-300, 1.0 - 1e-16);
        return s.mean + sd * boost::math::quantile(unit, u);
      };
      lo = q(0.05);
      hi = q(0.95);
    }
    f << panel.dates[t] << ',' << format_number(r.x_mode[t]) << ',' << format_number(r.x_mean[t])
      << ',' << format_number(r.x_sd[t]) << ',' << format_number(lo) << ',' << format_number(hi)
      << ',' << format_number(r.step_loglik[t]) << '\n';
  }
  std::printf("loglik %s\n", format_number(r.loglik).c_str());
  return 0;
}

int run_simulate(const Common& o, std::size_t weeks, double x0, const std::string& start) {
  RunConfig cfg = resolve(o);
  SimulationSpec sim;
  sim.weeks = weeks;
  sim.x0 = x0;
  sim.start_date = start;
  sim.seed = cfg.seed;
  sim.tenors = cfg.tenors;
  const std::vector<ZeroCurve> curves{ZeroCurve::flat(cfg.flat_rate)};
  const SimulatedPanel s = simulate_panel(cfg.model_config(), cfg.init, curves, sim);
  auto panel = create(cfg, "panel.csv");
  write_cds(panel, s.panel);
  auto truth = create(cfg, "truth.csv");
  truth << "date,x_true\n";
  for (std::size_t t = 0; t < s.panel.size(); ++t)
    truth << s.panel.dates[t] << ',' << format_number(s.x_true[t]) << '\n';
  if (s.defaulted)
    std::fprintf(stderr, "warning: default after %zu weeks; panel truncated\n", s.panel.size());
  return 0;
}

std::pair<std::vector<std::string>, std::vector<double>> read_loglik(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw DataError(path + ": empty");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  const auto col = std::find(head.begin(), head.end(), "loglik_t");
  if (col == head.end()) throw DataError(path + ": no loglik_t column");
  const auto idx = static_cast<std::size_t>(col - head.begin());
  std::vector<std::string> dates;
  std::vector<double> l;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (cells.size() != head.size()) throw DataError(path + ": ragged row '" + line + "'");
    dates.push_back(cells[0]);
    try {
      l.push_back(std::stod(cells[idx]));
    } catch (const std::exception&) {
      throw DataError(path + ": bad loglik_t '" + cells[idx] + "'");
    }
  }
  return {dates, l};
}

int run_vuong(const std::string& a, const std::string& b, int lag, const std::string& out) {
  const auto [da, la] = read_loglik(a);
  const auto [db, lb] = read_loglik(b);
  if (da != db) throw DataError("vuong: the two files cover different dates");
  const VuongReport r = vuong_test(la, lb, lag);
  json j{{"lambda", number(r.lambda)}, {"s_hat", number(r.s_hat)},
         {"statistic", number(r.statistic)}, {"lag", r.lag},
         {"observations", la.size()}, {"model_i", a}, {"model_j", b}};
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw DataError("cannot write " + out);
    f << j.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-changed Brownian motion credit model: pricing, filtering and estimation"};
  app.require_subcommand(1);

  Common price_o, cal_o, filt_o, sim_o;
  std::vector<double> xs;
  std::string price_date, price_out;
  auto* price = app.add_subcommand("price", "CDS term structure in bp for given x and parameters");
  add_common(price, price_o, false);
  price->add_option("--x", xs, "Log-leverage x (one or more)")->required();
  price->add_option("--date", price_date, "Curve date when a treasury file is given (default: last)");
  price->add_option("--out", price_out, "Output CSV (default stdout)");

  int max_evals = 0;
  auto* cal = app.add_subcommand("calibrate", "Maximum likelihood fit; writes calibration.json and trace.csv");
  add_common(cal, cal_o, true);
  cal->add_option("--max-evaluations", max_evals, "Per-start objective evaluation budget");

  std::string theta_path;
  auto* filt = app.add_subcommand("filter", "Filtered x path, bands and weekly log-likelihood; writes filter.csv");
  add_common(filt, filt_o, true);
  filt->add_option("--theta", theta_path, "calibration.json to take parameters from")->check(CLI::ExistingFile);

  std::size_t weeks = 78;
  double x0 = 0.7;
  std::string start = "2005-01-05";
  auto* sim = app.add_subcommand("simulate", "Synthetic panel; writes panel.csv and truth.csv");
  add_common(sim, sim_o, false);
  sim->add_option("--weeks", weeks, "Number of weekly dates");
  sim->add_option("--x0", x0, "Starting log-leverage");
  sim->add_option("--start", start, "First date (ISO-8601)");
  sim->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { sim_o.sets.push_back("seed=" + std::to_string(s)); }, "RNG seed");

  std::string va, vb, vout;
  int lag = -1;
  auto* vu = app.add_subcommand("vuong", "Vuong test from two loglik_t columns");
  vu->add_option("a", va, "filter.csv of model i")->required()->check(CLI::ExistingFile);
  vu->add_option("b", vb, "filter.csv of model j")->required()->check(CLI::ExistingFile);
  vu->add_option("--lag", lag, "Newey-West lag (default floor(4 (M/100)^(2/9)))");
  vu->add_option("--out", vout, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*price) return run_price(price_o, xs, price_date, price_out);
    if (*cal) return run_calibrate(cal_o, max_evals);
    if (*filt) return run_filter_verb(filt_o, theta_path);
    if (*sim) return run_simulate(sim_o, weeks, x0, start);
    if (*vu) return run_vuong(va, vb, lag, vout);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
