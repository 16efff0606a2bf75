#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mctd/trace.hpp"
#include "mctd/tree.hpp"

namespace mctd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolkitVersion = "0.1.0";

struct RunConfig {
  std::string benchmark = "ackley";
  std::size_t dim = 10;
  std::string algorithm = "mctd";
  std::size_t max_evals = 3000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::filesystem::path out_dir;  // empty: $MCTD_OUT_DIR (or ./runs) / <benchmark>-<dim>d-<algorithm>
  MctdConfig mctd;
  std::size_t turbo_init = 20;

  void validate() const;
  std::filesystem::path resolved_out_dir() const;
};

// Per-benchmark hyperparameter defaults. Michalewicz scales its value-sized
// weights (switch threshold, c_p, c_p_explore, c_p_leaf) by dim / 100.
MctdConfig default_mctd_config(const std::string& benchmark, std::size_t dim);

// Defaults for benchmark/dim, then every key present in `j` applied.
// Unknown keys and out-of-range values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
// Canonical flat representation (sorted keys). Round-trips through
// config_from_json.
nlohmann::json config_to_json(const RunConfig& cfg);

// Reads a .json file, or a flat TOML subset (key = value lines, numbers,
// quoted strings, booleans and arrays of numbers) for any other extension.
nlohmann::json load_config_file(const std::filesystem::path& path);
nlohmann::json parse_flat_toml(const std::string& text);

// 16 hex digits of FNV-1a over the canonical JSON without the output
// directory.
std::string config_fingerprint(const RunConfig& cfg);

RunTrace run_single(const RunConfig& cfg, std::uint64_t seed);

struct ExperimentResult {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::vector<std::filesystem::path> traces;
  std::vector<RunTrace> runs;
};

// One run per seed (seeds run concurrently), one trace CSV per seed plus
// manifest.json. Throws ConfigError or IoError.
ExperimentResult run_experiment(const RunConfig& cfg);

std::string trace_file_name(std::uint64_t seed);

}  // namespace mctd
