#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "mctd/experiment.hpp"
#include "mctd/summary.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kIoExit = 3;

// "1,2,3", "0-4" or a mix such as "0-2,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (part.empty()) throw mctd::ConfigError("bad --seeds value '" + text + "'");
    try {
      const std::size_t dash = part.find('-');
      std::size_t used = 0;
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } else {
        const std::string a = part.substr(0, dash), b = part.substr(dash + 1);
        std::size_t ua = 0, ub = 0;
        const auto lo = std::stoull(a, &ua), hi = std::stoull(b, &ub);
        if (ua != a.size() || ub != b.size() || hi < lo || hi - lo > 100000) throw std::invalid_argument(part);
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw mctd::ConfigError("bad --seeds value '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured local descent and trust-region BO benchmark harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment, one trace per seed");
  std::string config_path, benchmark, algo, seeds, out;
  std::size_t dim = 0, max_evals = 0;
  run->add_option("config", config_path, "TOML or JSON config file");
  run->add_option("--benchmark", benchmark, "ackley | michalewicz | quantized-tabular");
  run->add_option("--dim", dim, "problem dimension");
  run->add_option("--algo", algo, "mctd | random | nelder-mead | turbo");
  run->add_option("--seeds", seeds, "seed list, e.g. 0-4 or 1,3,5");
  run->add_option("--max-evals", max_evals, "evaluation budget per seed");
  run->add_option("--out", out, "output directory");

  auto* summ = app.add_subcommand("summarize", "write summary.json and curve.csv for a run directory");
  std::string summ_dir;
  summ->add_option("dir", summ_dir, "run directory")->required();

  auto* cmp = app.add_subcommand("compare", "best/step table over several run directories");
  std::vector<std::string> cmp_dirs;
  cmp->add_option("dirs", cmp_dirs, "run directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) {
      nlohmann::json j = config_path.empty() ? nlohmann::json::object() : mctd::load_config_file(config_path);
      if (!benchmark.empty()) j["benchmark"] = benchmark;
      if (dim > 0) j["dim"] = dim;
      if (!algo.empty()) j["algorithm"] = algo;
      if (!seeds.empty()) j["seeds"] = parse_seeds(seeds);
      if (max_evals > 0) j["max_evals"] = max_evals;
      if (!out.empty()) j["out"] = out;
      const mctd::RunConfig cfg = mctd::config_from_json(j);
      const mctd::ExperimentResult res = mctd::run_experiment(cfg);
      for (std::size_t k = 0; k < res.runs.size(); ++k)
        std::cout << "seed " << cfg.seeds[k] << ": best " << mctd::format_real(res.runs[k].final_best()) << " after "
                  << res.runs[k].records.size() << " evals (" << res.runs[k].wall_time_s << " s)\n";
      std::cout << "wrote " << res.manifest.string() << "\n";
    } else if (*summ) {
      const mctd::SummaryRow row = mctd::summarize(summ_dir);
      std::cout << mctd::compare_table({row});
    } else if (*cmp) {
      std::vector<mctd::SummaryRow> rows;
      for (const auto& d : cmp_dirs) rows.push_back(mctd::summarize_dir(d));
      std::cout << mctd::compare_table(rows);
    }
  } catch (const mctd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const mctd::AggregationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const mctd::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
