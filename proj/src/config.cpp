#include "tcbm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tcbm/errors.hpp"

namespace tcbm {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double number(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw DataError("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

std::vector<double> numbers(const std::string& key, std::string v) {
  v = trim(v);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw DataError("config: " + key + " has an unclosed list");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(key, trim(item)));
  return out;
}

}  // namespace

TimeChangeKind parse_model(const std::string& token) {
  const std::string t = lower(token);
  if (t == "vg" || t == "variance_gamma") return TimeChangeKind::variance_gamma;
  if (t == "exp" || t == "exponential") return TimeChangeKind::exponential;
  if (t == "blackcox" || t == "black-cox" || t == "brownian" || t == "bm")
    return TimeChangeKind::brownian;
  throw DataError("unknown model '" + token + "' (vg, exp, blackcox)");
}

std::string model_token(TimeChangeKind kind) {
  switch (kind) {
    case TimeChangeKind::variance_gamma: return "vg";
    case TimeChangeKind::exponential: return "exp";
    case TimeChangeKind::brownian: return "blackcox";
  }
  return "?";
}

FilterMode parse_filter_mode(const std::string& token) {
  const std::string t = lower(token);
  if (t == "truncated" || t == "trunc") return FilterMode::truncated;
  if (t == "kalman") return FilterMode::kalman;
  throw DataError("unknown filter mode '" + token + "' (truncated, kalman)");
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  auto pair = [&](Theta& lo, Theta& hi, double Theta::*field) {
    const auto p = numbers(key, v);
    if (p.size() != 2) throw DataError("config: " + key + " expects 'lower, upper'");
    lo.*field = p[0];
    hi.*field = p[1];
  };
  if (key == "model") model = parse_model(v);
  else if (key == "sigma") sigma = number(key, v);
  else if (key == "beta") beta = number(key, v);
  else if (key == "b") b = number(key, v);
  else if (key == "c0") init.c = number(key, v);
  else if (key == "betaQ0") init.beta_q = number(key, v);
  else if (key == "R0") init.recovery = number(key, v);
  else if (key == "eta0") init.eta = number(key, v);
  else if (key == "bounds.c") pair(bounds.lower, bounds.upper, &Theta::c);
  else if (key == "bounds.betaQ") pair(bounds.lower, bounds.upper, &Theta::beta_q);
  else if (key == "bounds.R") pair(bounds.lower, bounds.upper, &Theta::recovery);
  else if (key == "bounds.eta") pair(bounds.lower, bounds.upper, &Theta::eta);
  else if (key == "eps_fft") eps_fft = number(key, v);
  else if (key == "premium_dt") premium_dt = number(key, v);
  else if (key == "tenors") tenors = numbers(key, v);
  else if (key == "seed") {
    const double s = number(key, v);
    if (!(s >= 0.0) || s != std::floor(s)) throw DataError("config: seed must be a nonnegative integer");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "filter_mode") filter_mode = parse_filter_mode(v);
  else if (key == "threads") {
    const double n = number(key, v);
    if (!(n >= 0.0) || n != std::floor(n)) throw DataError("config: threads must be a nonnegative integer");
    threads = static_cast<int>(n);
  } else if (key == "cds") cds_path = v;
  else if (key == "treasury") treasury_path = v;
  else if (key == "flat_rate") flat_rate = number(key, v);
  else if (key == "output_dir") output_dir = v;
  else throw DataError("config: unknown key '" + key + "'");
}

void RunConfig::validate() const {
  if (!(sigma > 0.0)) throw DataError("config: sigma must be positive");
  if (!(beta < 0.0)) throw DataError("config: beta must be negative");
  if (!(b >= 0.0 && b < 1.0)) throw DataError("config: b must lie in [0, 1)");
  if (!(eps_fft > 1e-14 && eps_fft < 1e-4)) throw DataError("config: eps_fft must lie in (1e-14, 1e-4)");
  if (!(premium_dt > 0.0 && premium_dt <= 1.0)) throw DataError("config: premium_dt must lie in (0, 1]");
  if (tenors.empty()) throw DataError("config: tenors is empty");
  for (std::size_t k = 0; k < tenors.size(); ++k)
    if (!(tenors[k] > 0.0) || (k > 0 && !(tenors[k] > tenors[k - 1])))
      throw DataError("config: tenors must be positive and increasing");
  try {
    bounds.validate();
  } catch (const DomainError& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (!bounds.contains(init)) throw DataError("config: initial values lie outside the bounds");
  for (const auto* p : {&cds_path, &treasury_path})
    if (!p->empty() && !std::filesystem::exists(*p)) throw DataError("config: no such file " + *p);
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.kind = model;
  m.sigma = sigma;
  m.beta = beta;
  m.b = b;
  m.eps = eps_fft;
  m.premium_dt = premium_dt;
  return m;
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line, section;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    try {
      base.set(key, line.substr(eq + 1));
    } catch (const DataError& e) {
      throw DataError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open config " + path);
  return parse_config(f, std::move(base));
}

}  // namespace tcbm
