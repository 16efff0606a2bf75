#include "mctd/summary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mctd {

using nlohmann::json;

namespace {

// Sorted before summation so the result does not depend on seed order.
std::pair<double, double> mean_std(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mean) * (x - mean));
  std::sort(sq.begin(), sq.end());
  return {mean, std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0) / n)};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + p.string() + "'");
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) throw AggregationError("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string SummaryRow::cell() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f/%zu", best, earliest);
  return buf;
}

SummaryRow summarize_traces(const std::vector<RunTrace>& traces, const std::string& algorithm) {
  if (traces.empty()) throw AggregationError("no traces to summarize");
  SummaryRow row;
  row.algorithm = algorithm;
  row.benchmark = traces.front().benchmark;
  row.dim = traces.front().dim;
  std::size_t len = 0;
  for (const RunTrace& t : traces) {
    if (t.records.empty()) throw AggregationError("empty trace");
    if (t.benchmark != row.benchmark || t.dim != row.dim)
      throw AggregationError("traces mix benchmarks: '" + row.benchmark + "' (" + std::to_string(row.dim) +
                             "d) and '" + t.benchmark + "' (" + std::to_string(t.dim) + "d)");
    len = std::max(len, t.records.size());
  }
  row.n_seeds = traces.size();

  std::vector<double> finals;
  for (const RunTrace& t : traces) finals.push_back(t.final_best());
  row.best = *std::min_element(finals.begin(), finals.end());
  row.earliest = 0;
  for (const RunTrace& t : traces) {
    if (t.final_best() != row.best) continue;
    const std::size_t e = t.earliest_best_index();
    if (row.earliest == 0 || e < row.earliest) row.earliest = e;
  }
  std::tie(row.mean_final, row.std_final) = mean_std(finals);
  row.median_final = median(finals);

  row.curve.reserve(len);
  std::vector<double> at(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t k = 0; k < traces.size(); ++k) {
      const auto& r = traces[k].records;
      at[k] = i < r.size() ? r[i].best_y : r.back().best_y;
    }
    const auto [m, s] = mean_std(at);
    row.curve.push_back({i + 1, m, s});
  }
  return row;
}

SummaryRow summarize_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: '" + dir.string() + "'");
  std::string algorithm = dir.filename().string();
  if (algorithm.empty()) algorithm = dir.parent_path().filename().string();
  std::string benchmark;
  const auto manifest = dir / "manifest.json";
  if (std::filesystem::exists(manifest)) {
    try {
      const json m = json::parse(read_file(manifest));
      algorithm = m.at("algorithm").get<std::string>();
      benchmark = m.at("benchmark").get<std::string>();
    } catch (const json::exception& e) {
      throw IoError("malformed manifest '" + manifest.string() + "': " + e.what());
    }
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (entry.is_regular_file() && p.extension() == ".csv" && p.filename() != "curve.csv") files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw AggregationError("no trace CSVs in '" + dir.string() + "'");
  std::vector<RunTrace> traces;
  for (const auto& p : files) {
    RunTrace t = read_trace_csv(p);
    t.benchmark = benchmark;
    traces.push_back(std::move(t));
  }
  return summarize_traces(traces, algorithm);
}

json summary_to_json(const SummaryRow& row) {
  json j;
  j["algorithm"] = row.algorithm;
  j["benchmark"] = row.benchmark;
  j["dim"] = row.dim;
  j["best"] = row.best;
  j["earliest"] = row.earliest;
  j["mean_final"] = row.mean_final;
  j["std_final"] = row.std_final;
  j["median_final"] = row.median_final;
  j["n_seeds"] = row.n_seeds;
  j["cell"] = row.cell();
  return j;
}

std::string curve_to_csv(const SummaryRow& row) {
  std::string out = "eval_index,mean_best,std_best\n";
  for (const CurvePoint& c : row.curve)
    out += std::to_string(c.index) + "," + format_real(c.mean) + "," + format_real(c.std) + "\n";
  return out;
}

SummaryRow summarize(const std::filesystem::path& dir) {
  SummaryRow row = summarize_dir(dir);
  write_file(dir / "summary.json", summary_to_json(row).dump(2) + "\n");
  write_file(dir / "curve.csv", curve_to_csv(row));
  return row;
}

std::string compare_table(const std::vector<SummaryRow>& rows) {
  if (rows.empty()) throw AggregationError("nothing to compare");
  for (const SummaryRow& r : rows) {
    const bool bench_clash = !r.benchmark.empty() && !rows.front().benchmark.empty() &&
                             r.benchmark != rows.front().benchmark;
    if (bench_clash || r.dim != rows.front().dim)
      throw AggregationError("compare needs one benchmark; got '" + rows.front().benchmark + "' and '" +
                             r.benchmark + "'");
  }
  std::string bench;
  for (const SummaryRow& r : rows)
    if (!r.benchmark.empty()) bench = r.benchmark;
  const std::string title = (bench.empty() ? std::string("?") : bench) + "-" + std::to_string(rows.front().dim) + "d";

  std::size_t w = std::max<std::size_t>(9, title.size());
  for (const SummaryRow& r : rows) w = std::max(w, r.algorithm.size());
  char line[256];
  std::string out;
  std::snprintf(line, sizeof line, "%-*s  %-18s  %-22s  %s\n", static_cast<int>(w), "algorithm",
                (title + " best/step").c_str(), "mean +- std (final)", "seeds");
  out += line;
  out += std::string(w + 2 + 18 + 2 + 22 + 2 + 5, '-') + "\n";
  for (const SummaryRow& r : rows) {
    char ms[64];
    std::snprintf(ms, sizeof ms, "%.4g +- %.3g", r.mean_final, r.std_final);
    std::snprintf(line, sizeof line, "%-*s  %-18s  %-22s  %zu\n", static_cast<int>(w), r.algorithm.c_str(),
                  r.cell().c_str(), ms, r.n_seeds);
    out += line;
  }
  return out;
}

}  // namespace mctd
