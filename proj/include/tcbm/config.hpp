#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcbm/estimation.hpp"
#include "tcbm/filter.hpp"

namespace tcbm {

// Settings of one batch run. Defaults are the frozen values sigma = 0.3,
// beta = -0.5, b = 0.2 with the VG model.
struct RunConfig {
  TimeChangeKind model = TimeChangeKind::variance_gamma;
  double sigma = 0.3;
  double beta = -0.5;
  double b = 0.2;
  Theta init;
  ThetaBounds bounds;
  double eps_fft = kDefaultFftEps;
  double premium_dt = kDefaultPremiumDt;
  std::vector<double> tenors{1, 2, 3, 4, 5, 7, 10};
  std::uint64_t seed = 42;
  FilterMode filter_mode = FilterMode::truncated;
  int threads = 0;  // 0: library default
  std::string cds_path;
  std::string treasury_path;
  double flat_rate = 0.03;  // used when no treasury file is given
  std::string output_dir = ".";

  // key = value, as in the file. Throws DataError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  // Bounds ordered, init inside them, referenced files present.
  void validate() const;
  ModelConfig model_config() const;
};

// Plain key = value lines; '#' starts a comment; [section] prefixes the keys
// that follow, so [bounds] then c = 0.1, 5 sets bounds.c.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

TimeChangeKind parse_model(const std::string& token);
std::string model_token(TimeChangeKind kind);
FilterMode parse_filter_mode(const std::string& token);

}  // namespace tcbm
