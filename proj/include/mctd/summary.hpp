#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mctd/trace.hpp"

namespace mctd {

struct AggregationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CurvePoint {
  std::size_t index = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct SummaryRow {
  std::string algorithm;
  std::string benchmark;
  std::size_t dim = 0;
  double best = 0.0;           // best value over all seeds
  std::size_t earliest = 0;    // first evaluation index at which any seed reached `best`
  double mean_final = 0.0;
  double std_final = 0.0;      // population std over seeds
  double median_final = 0.0;
  std::size_t n_seeds = 0;
  std::vector<CurvePoint> curve;

  // "best/earliest" with two decimals, e.g. "0.07/2342".
  std::string cell() const;
};

// Traces of one algorithm. Shorter traces (early stop) carry their final
// best forward. Throws AggregationError on an empty set or mixed benchmarks.
SummaryRow summarize_traces(const std::vector<RunTrace>& traces, const std::string& algorithm);

// Reads every trace CSV in `dir`. Algorithm and benchmark come from
// manifest.json when present, otherwise the directory name is the algorithm.
SummaryRow summarize_dir(const std::filesystem::path& dir);

nlohmann::json summary_to_json(const SummaryRow& row);
std::string curve_to_csv(const SummaryRow& row);

// Writes summary.json and curve.csv into `dir`.
SummaryRow summarize(const std::filesystem::path& dir);

// Rows must share benchmark and dim. One line per algorithm.
std::string compare_table(const std::vector<SummaryRow>& rows);

double median(std::vector<double> v);

}  // namespace mctd
