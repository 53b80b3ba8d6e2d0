#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwi/stats.hpp"

namespace gwi::cli {

using KeyValues = std::map<std::string, std::string>;

/// Invalid configuration; `field` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::string experiment;

  // Model.
  double alpha = 1.5;
  double mu_a = 0.5;
  double c = 0.3;
  std::string offspring = "poisson";

  std::size_t n = 100'000;
  std::size_t reps = 2000;
  std::uint64_t seed = 42;
  std::string a_n_mode = "analytic";
  std::string init = "series";

  // Limit sampler.
  std::size_t samples = 200'000;
  double eps = 0.0;  ///< 0 selects eps_for_bound(eps_target)
  double eps_target = 1e-3;
  std::string remainder = "compensate";

  // Tables.
  double x_min = -5.0, x_max = 5.0, x_step = 0.1;
  double s_min = -5.0, s_max = 5.0, s_step = 0.5;
  double t_min = -5.0, t_max = 5.0, t_step = 0.5;

  // Validators.
  std::size_t steps = 10'000'000;
  double quantile = 0.999;
  int window = 3;
  double laplace_eps = 1.0;
  std::vector<double> s_values = {0.5, 1.0, 2.0};
  std::size_t bootstrap = 1000;
  double beta = 2.0;
  double karamata_x = 1000.0;

  std::string out = ".";
};

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names = {"simulate",     "estimate",      "limit-sample",
                                                 "cdf-table",    "cf-table",      "tail-validate",
                                                 "laplace-validate", "karamata"};
  return names;
}

/// Flat `key = value` text, '#' comments. A JSON run manifest is accepted too;
/// its "config" object is used.
KeyValues read_config_file(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text);

ExperimentConfig parse_config(const KeyValues& kv);
KeyValues to_key_values(const ExperimentConfig& config);

struct OutputFile {
  std::string name;
  std::uintmax_t bytes = 0;
  std::uint32_t crc32 = 0;
};

struct RunManifest {
  KeyValues config;
  std::string build_id;
  std::string started_at;
  double wall_seconds = 0.0;
  unsigned workers = 1;
  std::string seed_rule;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> stream_seeds;  ///< (stream index, seed)
  std::vector<OutputFile> outputs;
  std::vector<std::string> notes;
};

/// Runs the configured experiment, writes its CSV/JSON outputs and
/// manifest.json into config.out, and returns the manifest.
RunManifest run(const ExperimentConfig& config, unsigned workers);

std::uint32_t file_crc32(const std::filesystem::path& path);

/// Reads one numeric column; `column` may be empty when the file has a single column.
std::vector<double> read_csv_column(const std::filesystem::path& path, const std::string& column = "");

struct CompareReport {
  stats::KsResult ks;
  std::size_t rows_a = 0, rows_b = 0;
};

/// Two-sample KS between two CSV columns with at least 500 rows each.
CompareReport compare(const std::filesystem::path& a, const std::filesystem::path& b,
                      const std::string& column_a = "", const std::string& column_b = "");

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double v);

}  // namespace gwi::cli
