#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mctd/domain.hpp"

namespace mctd {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TraceRecord {
  std::size_t index = 0;  // 1-based evaluation ordinal
  Point x;
  double y = 0.0;
  double best_y = 0.0;  // running best including this record
  std::string node;     // tree node id, or a baseline tag
};

struct RunTrace {
  std::string algorithm;
  std::string benchmark;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;
  double wall_time_s = 0.0;
  std::vector<TraceRecord> records;

  void append(const Sample& s, std::string node);
  double final_best() const;
  // First index whose running best equals the final best.
  std::size_t earliest_best_index() const;
};

// Forwards every ground-truth call of `obj` into `trace`, tagging it with
// whatever `tag` currently refers to. Detaches on destruction.
class TraceRecorder {
 public:
  TraceRecorder(Objective& obj, RunTrace& trace, const std::string& tag);
  ~TraceRecorder();
  TraceRecorder(const TraceRecorder&) = delete;
  TraceRecorder& operator=(const TraceRecorder&) = delete;

 private:
  Objective& obj_;
};

// Header: eval_index,x_0..x_{d-1},y,best_y,node. Reals use the shortest
// round-trip representation, so parse(serialize(t)) reproduces t exactly.
std::string trace_to_csv(const RunTrace& trace);
RunTrace trace_from_csv(std::string_view text);

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path);
RunTrace read_trace_csv(const std::filesystem::path& path);

std::string format_real(double v);

}  // namespace mctd
