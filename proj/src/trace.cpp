#include "mctd/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mctd {

void RunTrace::append(const Sample& s, std::string node) {
  TraceRecord r;
  r.index = s.index;
  r.x = s.x;
  r.y = s.y;
  r.best_y = records.empty() ? s.y : std::min(records.back().best_y, s.y);
  r.node = std::move(node);
  records.push_back(std::move(r));
}

double RunTrace::final_best() const {
  return records.empty() ? std::numeric_limits<double>::infinity() : records.back().best_y;
}

std::size_t RunTrace::earliest_best_index() const {
  const double best = final_best();
  for (const auto& r : records)
    if (r.best_y == best) return r.index;
  return 0;
}

TraceRecorder::TraceRecorder(Objective& obj, RunTrace& trace, const std::string& tag) : obj_(obj) {
  obj_.set_observer([&trace, &tag](const Sample& s) { trace.append(s, tag); });
}

TraceRecorder::~TraceRecorder() { obj_.set_observer(nullptr); }

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trace_to_csv(const RunTrace& trace) {
  std::size_t dim = trace.dim;
  if (!trace.records.empty()) dim = static_cast<std::size_t>(trace.records.front().x.size());
  std::string out = "eval_index";
  for (std::size_t i = 0; i < dim; ++i) out += ",x_" + std::to_string(i);
  out += ",y,best_y,node\n";
  for (const auto& r : trace.records) {
    out += std::to_string(r.index);
    for (Eigen::Index i = 0; i < r.x.size(); ++i) {
      out += ',';
      out += format_real(r.x[i]);
    }
    out += ',';
    out += format_real(r.y);
    out += ',';
    out += format_real(r.best_y);
    out += ',';
    out += r.node;
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_real(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("trace csv: bad real '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("trace csv: bad index '" + std::string(s) + "'");
  return v;
}

}  // namespace

RunTrace trace_from_csv(std::string_view text) {
  RunTrace t;
  std::size_t line_start = 0;
  bool header = true;
  std::size_t dim = 0;
  while (line_start < text.size()) {
    std::size_t end = text.find('\n', line_start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(line_start, end - line_start);
    line_start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto cols = split(line);
    if (header) {
      if (cols.size() < 4 || cols.front() != "eval_index" || cols[cols.size() - 3] != "y" ||
          cols[cols.size() - 2] != "best_y" || cols.back() != "node")
        throw IoError("trace csv: unexpected header");
      dim = cols.size() - 4;
      for (std::size_t i = 0; i < dim; ++i)
        if (cols[1 + i] != "x_" + std::to_string(i)) throw IoError("trace csv: unexpected header");
      header = false;
      continue;
    }
    if (cols.size() != dim + 4) throw IoError("trace csv: wrong column count");
    TraceRecord r;
    r.index = parse_index(cols[0]);
    r.x.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) r.x[static_cast<Eigen::Index>(i)] = parse_real(cols[1 + i]);
    r.y = parse_real(cols[dim + 1]);
    r.best_y = parse_real(cols[dim + 2]);
    r.node = std::string(cols[dim + 3]);
    t.records.push_back(std::move(r));
  }
  if (header) throw IoError("trace csv: missing header");
  t.dim = dim;
  return t;
}

void write_trace_csv(const RunTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string csv = trace_to_csv(trace);
  out.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_csv(ss.str());
}

}  // namespace mctd
