#include "mctd/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "mctd/baselines.hpp"
#include "mctd/benchmarks.hpp"

namespace mctd {

using nlohmann::json;

namespace {

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"mctd", "random", "nelder-mead", "turbo"};
  return names;
}

bool known(const std::vector<std::string>& names, const std::string& n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_real(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

MctdConfig default_mctd_config(const std::string& benchmark, std::size_t dim) {
  MctdConfig c;
  c.tr = TrConfig::for_dim(dim, 5);
  c.fit.hyper_subset = 100;
  c.inherit = c.fit.max_train;
  if (benchmark == "michalewicz") {
    const double s = static_cast<double>(dim) / 100.0;
    c.ratio_descent = 1.0;
    c.ratio_bo = 2.0;
    c.descent.alpha0 = 0.02;
    c.descent.switch_threshold = -30.0 * s;
    c.uct.c_d = 50.0;
    c.uct.c_p = 1.0 * s;
    c.uct.c_p_explore = 0.2 * s;
    c.uct.c_d_leaf = 1.0;
    c.uct.c_p_leaf = 10.0 * s;
  } else if (benchmark == "quantized-tabular") {
    c.ratio_descent = 1.0;
    c.ratio_bo = 4.0;
    c.descent.alpha0 = 0.5;
    c.descent.switch_threshold = 5.0;
    c.uct.c_d = 50.0;
    c.uct.c_p = 1.0;
    c.uct.c_p_explore = 1.0;
    c.uct.c_d_leaf = 100.0;
    c.uct.c_p_leaf = 10.0;
  } else {
    c.ratio_descent = 1.0;
    c.ratio_bo = 1.0;
    c.iteration_budget = 40;
    c.descent.alpha0 = 0.2;
    c.descent.switch_threshold = 10.0;
    c.uct.c_d = 10.0;
    c.uct.c_p = 0.5;
    c.uct.c_p_explore = 0.1;
    c.uct.c_d_leaf = 50.0;
    c.uct.c_p_leaf = 0.1;
  }
  return c;
}

void RunConfig::validate() const {
  require(known(benchmark_names(), benchmark), "unknown benchmark '" + benchmark + "'");
  require(known(algorithm_names(), algorithm), "unknown algorithm '" + algorithm + "'");
  require(dim >= 1 && dim <= 1000, "dim must be in [1, 1000]");
  require(max_evals >= 1, "max_evals must be >= 1");
  require(!seeds.empty(), "seeds must be non-empty");
  require(std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() == seeds.size(),
          "seeds must be distinct");
  if (algorithm == "nelder-mead") require(max_evals >= dim + 2, "nelder-mead needs max_evals >= dim + 2");
  if (algorithm == "turbo") require(max_evals >= turbo_init, "turbo needs max_evals >= turbo_init");
  require(mctd.tr.batch >= 1 && mctd.tr.batch <= 100, "batch must be in [1, 100]");
  require(mctd.tr.candidate_cap >= 1, "candidate_cap must be >= 1");
  require(mctd.fit.restarts >= 1 && mctd.fit.evals_per_restart >= 1, "gp fit budgets must be >= 1");
  require(mctd.fit.max_train >= 2, "gp_cap must be >= 2");
  require(turbo_init >= 2, "turbo_init must be >= 2");
  try {
    mctd.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

std::filesystem::path RunConfig::resolved_out_dir() const {
  if (!out_dir.empty()) return out_dir;
  const char* env = std::getenv("MCTD_OUT_DIR");
  const std::filesystem::path root = (env && *env) ? env : "runs";
  return root / (benchmark + "-" + std::to_string(dim) + "d-" + algorithm);
}

json config_to_json(const RunConfig& c) {
  json j;
  j["benchmark"] = c.benchmark;
  j["dim"] = c.dim;
  j["algorithm"] = c.algorithm;
  j["max_evals"] = c.max_evals;
  j["seeds"] = c.seeds;
  j["out"] = c.out_dir.string();
  j["budget_ratio"] = json::array({c.mctd.ratio_descent, c.mctd.ratio_bo});
  j["iteration_budget"] = c.mctd.iteration_budget;
  j["alpha"] = c.mctd.descent.alpha0;
  if (std::isfinite(c.mctd.descent.switch_threshold))
    j["switch_at"] = c.mctd.descent.switch_threshold;
  else
    j["switch_at"] = nullptr;
  j["n_directions"] = c.mctd.descent.n_directions;
  j["fine_budget"] = c.mctd.descent.fine_budget;
  j["max_walk"] = c.mctd.descent.max_walk;
  j["c_d"] = c.mctd.uct.c_d;
  j["c_p"] = c.mctd.uct.c_p;
  j["c_p_explore"] = c.mctd.uct.c_p_explore;
  j["c_d_leaf"] = c.mctd.uct.c_d_leaf;
  j["c_p_leaf"] = c.mctd.uct.c_p_leaf;
  j["window"] = c.mctd.uct.window;
  j["window_leaf"] = c.mctd.uct.window_leaf;
  j["nr"] = c.mctd.nr;
  j["inherit"] = c.mctd.inherit;
  j["batch"] = c.mctd.tr.batch;
  j["candidate_cap"] = c.mctd.tr.candidate_cap;
  j["gp_cap"] = c.mctd.fit.max_train;
  j["gp_restarts"] = c.mctd.fit.restarts;
  j["gp_evals"] = c.mctd.fit.evals_per_restart;
  j["gp_hyper_subset"] = c.mctd.fit.hyper_subset;
  j["turbo_init"] = c.turbo_init;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> keys{
      "benchmark", "dim",        "algorithm",    "max_evals",   "seeds",        "out",
      "budget_ratio", "iteration_budget", "alpha", "switch_at", "n_directions", "fine_budget",
      "max_walk",  "c_d",        "c_p",          "c_p_explore", "c_d_leaf",     "c_p_leaf",
      "window",    "window_leaf", "nr",          "inherit",          "batch",       "candidate_cap", "gp_cap",
      "gp_restarts", "gp_evals", "gp_hyper_subset", "turbo_init"};
  for (const auto& [k, v] : j.items())
    if (!keys.contains(k)) throw ConfigError("unknown config key '" + k + "'");

  RunConfig c;
  if (j.contains("benchmark")) c.benchmark = get_as<std::string>(j, "benchmark");
  if (j.contains("dim")) c.dim = get_count(j, "dim");
  require(known(benchmark_names(), c.benchmark), "unknown benchmark '" + c.benchmark + "'");
  require(c.dim >= 1, "dim must be >= 1");
  c.mctd = default_mctd_config(c.benchmark, c.dim);

  if (j.contains("algorithm")) c.algorithm = get_as<std::string>(j, "algorithm");
  if (j.contains("max_evals")) c.max_evals = get_count(j, "max_evals");
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    require(s.is_array(), "seeds must be an array of non-negative integers");
    c.seeds.clear();
    for (const auto& v : s) {
      require(v.is_number_integer() && v.get<long long>() >= 0, "seeds must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (j.contains("out")) c.out_dir = get_as<std::string>(j, "out");
  if (j.contains("budget_ratio")) {
    const json& r = j.at("budget_ratio");
    require(r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number(),
            "budget_ratio must be [descent, bo]");
    c.mctd.ratio_descent = r[0].get<double>();
    c.mctd.ratio_bo = r[1].get<double>();
  }
  if (j.contains("iteration_budget")) c.mctd.iteration_budget = get_count(j, "iteration_budget");
  if (j.contains("alpha")) c.mctd.descent.alpha0 = get_real(j, "alpha");
  if (j.contains("switch_at")) {
    const json& v = j.at("switch_at");
    if (v.is_null())
      c.mctd.descent.switch_threshold = -std::numeric_limits<double>::infinity();
    else
      c.mctd.descent.switch_threshold = get_real(j, "switch_at");
  }
  if (j.contains("n_directions")) c.mctd.descent.n_directions = get_count(j, "n_directions");
  if (j.contains("fine_budget")) c.mctd.descent.fine_budget = get_count(j, "fine_budget");
  if (j.contains("max_walk")) c.mctd.descent.max_walk = get_count(j, "max_walk");
  if (j.contains("c_d")) c.mctd.uct.c_d = get_real(j, "c_d");
  if (j.contains("c_p")) c.mctd.uct.c_p = get_real(j, "c_p");
  if (j.contains("c_p_explore")) c.mctd.uct.c_p_explore = get_real(j, "c_p_explore");
  if (j.contains("c_d_leaf")) c.mctd.uct.c_d_leaf = get_real(j, "c_d_leaf");
  if (j.contains("c_p_leaf")) c.mctd.uct.c_p_leaf = get_real(j, "c_p_leaf");
  if (j.contains("window")) c.mctd.uct.window = get_count(j, "window");
  if (j.contains("window_leaf")) c.mctd.uct.window_leaf = get_count(j, "window_leaf");
  c.mctd.history_cap = std::max(c.mctd.uct.window, c.mctd.uct.window_leaf);
  if (j.contains("nr")) c.mctd.nr = get_count(j, "nr");
  if (j.contains("inherit")) c.mctd.inherit = get_count(j, "inherit");
  if (j.contains("batch")) {
    c.mctd.tr = TrConfig::for_dim(c.dim, get_count(j, "batch"));
    require(get_count(j, "batch") >= 1, "batch must be >= 1");
  }
  if (j.contains("candidate_cap")) c.mctd.tr.candidate_cap = get_count(j, "candidate_cap");
  if (j.contains("gp_cap")) c.mctd.fit.max_train = get_count(j, "gp_cap");
  if (j.contains("gp_restarts")) c.mctd.fit.restarts = get_count(j, "gp_restarts");
  if (j.contains("gp_evals")) c.mctd.fit.evals_per_restart = get_count(j, "gp_evals");
  if (j.contains("gp_hyper_subset")) c.mctd.fit.hyper_subset = get_count(j, "gp_hyper_subset");
  if (j.contains("turbo_init")) c.turbo_init = get_count(j, "turbo_init");
  c.validate();
  return c;
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json parse_toml_value(const std::string& raw, std::size_t line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("toml line " + std::to_string(line_no) + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated string");
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  if (v == "nan" || v == "-inf") return nullptr;
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("toml line " + std::to_string(line_no) + ": unterminated array");
    json arr = json::array();
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) arr.push_back(parse_toml_value(item, line_no));
    return arr;
  }
  try {
    return json::parse(v);
  } catch (const json::exception&) {
    throw ConfigError("toml line " + std::to_string(line_no) + ": cannot parse value '" + v + "'");
  }
}

}  // namespace

json parse_flat_toml(const std::string& text) {
  json j = json::object();
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '#' && !in_str) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') throw ConfigError("toml line " + std::to_string(line_no) + ": tables are not supported");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("toml line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (j.contains(key)) throw ConfigError("toml line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    j[key] = parse_toml_value(line.substr(eq + 1), line_no);
  }
  return j;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return json::parse(ss.str());
    } catch (const json::exception& e) {
      throw ConfigError("config '" + path.string() + "': " + e.what());
    }
  }
  return parse_flat_toml(ss.str());
}

std::string config_fingerprint(const RunConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("out");
  const std::string canon = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string trace_file_name(std::uint64_t seed) { return "trace_seed" + std::to_string(seed) + ".csv"; }

RunTrace run_single(const RunConfig& cfg, std::uint64_t seed) {
  Objective obj = make_benchmark(cfg.benchmark, cfg.dim);
  RunTrace t;
  if (cfg.algorithm == "mctd") {
    t = mctd_run(obj, cfg.mctd, cfg.max_evals, seed);
  } else if (cfg.algorithm == "random") {
    t = random_search_run(obj, cfg.max_evals, seed);
  } else if (cfg.algorithm == "nelder-mead") {
    t = nelder_mead_run(obj, cfg.max_evals, seed);
  } else if (cfg.algorithm == "turbo") {
    TurboOptions opts;
    opts.n_init = cfg.turbo_init;
    opts.batch = cfg.mctd.tr.batch;
    opts.fit = cfg.mctd.fit;
    t = turbo_baseline_run(obj, cfg.max_evals, seed, opts);
  } else {
    throw ConfigError("unknown algorithm '" + cfg.algorithm + "'");
  }
  t.fingerprint = config_fingerprint(cfg);
  return t;
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.dir = cfg.resolved_out_dir();
  std::error_code ec;
  std::filesystem::create_directories(res.dir, ec);
  if (ec) throw IoError("cannot create output directory '" + res.dir.string() + "': " + ec.message());

  res.runs.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  const auto n = static_cast<std::ptrdiff_t>(cfg.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      res.runs[k] = run_single(cfg, cfg.seeds[k]);
      write_trace_csv(res.runs[k], res.dir / trace_file_name(cfg.seeds[k]));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  json manifest;
  manifest["fingerprint"] = config_fingerprint(cfg);
  manifest["version"] = kToolkitVersion;
  manifest["algorithm"] = cfg.algorithm;
  manifest["benchmark"] = cfg.benchmark;
  manifest["dim"] = cfg.dim;
  manifest["max_evals"] = cfg.max_evals;
  manifest["config"] = config_to_json(cfg);
  json runs = json::array();
  for (std::size_t k = 0; k < cfg.seeds.size(); ++k) {
    res.traces.push_back(res.dir / trace_file_name(cfg.seeds[k]));
    runs.push_back({{"seed", cfg.seeds[k]},
                    {"file", trace_file_name(cfg.seeds[k])},
                    {"evals", res.runs[k].records.size()},
                    {"final_best", res.runs[k].final_best()},
                    {"wall_time_s", res.runs[k].wall_time_s}});
  }
  manifest["runs"] = runs;
  res.manifest = res.dir / "manifest.json";
  std::ofstream out(res.manifest, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + res.manifest.string() + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + res.manifest.string() + "'");
  return res;
}

}  // namespace mctd
