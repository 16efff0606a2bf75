#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "mctd/baselines.hpp"
#include "mctd/benchmarks.hpp"
#include "mctd/descent.hpp"
#include "mctd/experiment.hpp"
#include "mctd/gp.hpp"
#include "mctd/sampling.hpp"
#include "mctd/summary.hpp"
#include "mctd/tree.hpp"

using namespace mctd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

double median_best(const std::string& algo, const std::string& bench, std::size_t dim,
                   std::size_t evals, const std::function<void(RunConfig&)>& tweak = {}) {
  RunConfig c;
  c.benchmark = bench;
  c.dim = dim;
  c.algorithm = algo;
  c.max_evals = evals;
  c.seeds = kSeeds;
  c.mctd = default_mctd_config(bench, dim);
  if (tweak) tweak(c);
  c.validate();
  std::vector<double> finals;
  for (std::uint64_t s : c.seeds) finals.push_back(run_single(c, s).final_best());
  std::ostringstream os;
  for (double f : finals) os << ' ' << format_real(f);
  std::cerr << "  " << algo << ' ' << bench << '-' << dim << "d @" << evals << ':' << os.str() << '\n';
  return median(finals);
}

oracle::DenseGp dense_of(const GpModel& m) {
  oracle::DenseGp g;
  const auto& x = m.train_x_unit();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    oracle::Vec row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
    g.x.push_back(row);
  }
  const auto& y = m.train_y_standardized();
  g.y.assign(y.data(), y.data() + y.size());
  const auto& ls = m.params().lengthscales;
  g.ls.assign(ls.data(), ls.data() + ls.size());
  g.s2 = m.params().signal_variance;
  g.diag = m.params().noise_variance + m.jitter();
  return g;
}

double rel_err(double a, double b, double scale) {
  return std::abs(a - b) / std::max(std::abs(b), scale);
}

Verdict gp_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  std::uniform_int_distribution<int> dim_d(1, 5), n_d(1, 20);
  std::uniform_real_distribution<double> ls_d(0.1, 2.0), s2_d(0.1, 10.0), noise_d(1e-6, 1e-2), lo_d(-5.0, 5.0),
      w_d(0.5, 10.0), c_d(-3.0, 3.0);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const auto d = static_cast<std::size_t>(dim_d(rng));
    const double lo = lo_d(rng);
    const DomainBox box = DomainBox::cube(d, lo, lo + w_d(rng));
    const double a = c_d(rng), b = c_d(rng);
    std::vector<Sample> samples;
    const auto n = static_cast<std::size_t>(n_d(rng));
    for (std::size_t i = 0; i < n; ++i) {
      const Point x = sample_uniform(box, rng);
      samples.push_back({x, a * std::sin(x.sum()) + b * x.squaredNorm(), i + 1});
    }
    KernelParams p;
    p.lengthscales.resize(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < p.lengthscales.size(); ++k) p.lengthscales[k] = ls_d(rng);
    p.signal_variance = s2_d(rng);
    p.noise_variance = noise_d(rng);
    const GpModel m = GpModel::condition(samples, box, p);
    const oracle::DenseGp g = dense_of(m);
    worst = std::max(worst, rel_err(m.log_marginal_likelihood(), g.lml(), 1e-300));
    for (int q = 0; q < 10; ++q) {
      const Point x = sample_uniform(box, rng);
      const auto pr = m.predict(x);
      const Point u = box.to_unit(x);
      const auto o = g.predict(oracle::Vec(u.data(), u.data() + u.size()));
      const double ys = m.y_std();
      // near-zero quantities are compared against the prior scale
      worst = std::max(worst, rel_err(pr.mean, m.y_mean() + ys * o.mean, ys * std::sqrt(g.s2)));
      worst = std::max(worst, rel_err(pr.variance, ys * ys * o.variance, ys * ys * g.s2));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-6 && t < 30.0, fmt("max relative error %.3g, %.2f s", worst, t)};
}

Verdict ei_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(7);
  std::uniform_real_distribution<double> mu_d(-3.0, 3.0), sd_d(0.01, 1.0), best_d(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double mu = mu_d(rng), sd = sd_d(rng), best = best_d(rng);
    worst = std::max(worst, std::abs(expected_improvement(mu, sd, best) -
                                     oracle::ei_monte_carlo(mu, sd, best, 100000, 1000 + static_cast<std::uint64_t>(i))));
  }
  const double t = seconds_since(t0);
  return {worst <= 2e-3 && t < 10.0, fmt("max abs error %.3g, %.2f s", worst, t)};
}

Verdict descent_suite() {
  Rng rng(11);
  std::uniform_int_distribution<int> dim_d(1, 8), variant_d(0, 2), budget_d(1, 2), n_d(3, 25);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 3.0);
  std::size_t worsened = 0, miscounted = 0, steps = 0, per[3] = {0, 0, 0};
  for (int step = 0; step < 1000; ++step) {
    const auto d = static_cast<std::size_t>(dim_d(rng));
    const DomainBox box = DomainBox::cube(d, -2.0, 3.0);
    Point c(static_cast<Eigen::Index>(d)), a(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      c[k] = u(rng);
      a[k] = pos(rng);
    }
    const double amp = u(rng), freq = pos(rng);
    Objective obj("smooth", box, [c, a, amp, freq](const Point& x) {
      return (a.array() * (x - c).array().square()).sum() + amp * std::sin(freq * x.sum());
    });
    std::vector<Sample> s;
    const auto n = static_cast<std::size_t>(n_d(rng));
    for (std::size_t i = 0; i < n; ++i) s.push_back(obj.evaluate(sample_uniform(box, rng)));
    const Sample x = *std::min_element(s.begin(), s.end(), [](const Sample& l, const Sample& r) { return l.y < r.y; });
    Point dx(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < dx.size(); ++k) dx[k] = u(rng);
    dx *= pos(rng) * 0.3;

    const int variant = variant_d(rng);
    const std::size_t before = obj.eval_count();
    DescentOutcome out;
    if (variant == 0) {
      out = stp_basic_step(obj, x, dx, static_cast<std::size_t>(budget_d(rng)));
    } else {
      KernelParams p;
      p.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), pos(rng) * 0.5);
      const GpModel m = GpModel::condition(s, box, p);
      out = variant == 1 ? stp_oracle_step(obj, m, x, dx, 10) : stp_fine_step(obj, m, x, dx, 16);
    }
    ++per[variant];
    ++steps;
    double expect = x.y;
    for (const Sample& e : out.evaluated) expect = std::min(expect, e.y);
    if (out.new_best.y > x.y || out.new_best.y != expect) ++worsened;
    const std::size_t delta = obj.eval_count() - before;
    if (delta != out.ground_truth_calls || delta != out.evaluated.size()) ++miscounted;
  }
  std::ostringstream os;
  os << steps << " steps (basic " << per[0] << ", oracle " << per[1] << ", fine " << per[2] << "), "
     << worsened << " worsened, " << miscounted << " miscounted";
  return {worsened == 0 && miscounted == 0 && per[0] > 0 && per[1] > 0 && per[2] > 0, os.str()};
}

struct NodeView {
  double best;
  std::vector<double> dy;
  std::size_t visits;
  std::vector<std::size_t> children;
};

struct TreeRun {
  std::vector<std::size_t> selected;
  std::vector<std::vector<long>> choices;
  std::vector<bool> expanded;
  std::size_t violations = 0;
  std::string first_violation;
};

TreeRun tree_run(double shift, const MctdConfig& cfg, std::size_t iterations, bool check) {
  const Objective base = make_benchmark("ackley", 5);
  const EvalFn f = base.eval_fn();
  Objective obj("ackley-shifted", base.box(), [f, shift](const Point& x) { return f(x) + shift; });
  MctdConfig c = cfg;
  c.descent.switch_threshold += shift;
  MctdSearch s(obj, c, 42);
  TreeRun r;
  auto flag = [&r](bool ok, const std::string& what) {
    if (!ok && r.violations++ == 0) r.first_violation = what;
  };
  std::vector<NodeView> view;
  s.initialize();
  for (std::size_t it = 0; it < iterations && s.step(); ++it) {
    const Selection& sel = s.selections().back();
    r.selected.push_back(sel.node);
    r.expanded.push_back(sel.expanded);
    std::vector<long> ch;
    for (const auto& d : sel.decisions) ch.push_back(d.chosen ? static_cast<long>(*d.chosen) : -1);
    r.choices.push_back(ch);
    if (!check) continue;
    // scores recomputed from the tree as it was before this iteration
    for (const auto& d : sel.decisions) {
      const NodeView& b = view.at(d.branch);
      std::vector<double> kid_best;
      double top = -std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < b.children.size(); ++i) {
        const NodeView& k = view.at(b.children[i]);
        const std::size_t w = std::min(c.uct.window, k.dy.size());
        double recent = 0.0;
        for (std::size_t j = k.dy.size() - w; j < k.dy.size(); ++j) recent += k.dy[j];
        const double expect = -k.best + c.uct.c_d * recent +
                              c.uct.c_p * std::sqrt(std::log(static_cast<double>(b.visits)) / static_cast<double>(k.visits));
        flag(std::abs(d.child_scores.at(i) - expect) <= 1e-9 * std::max(1.0, std::abs(expect)), "child score");
        kid_best.push_back(k.best);
        if (d.child_scores[i] > top) {
          top = d.child_scores[i];
          arg = i;
        }
      }
      double mean = 0.0;
      for (double v : kid_best) mean += v;
      mean /= static_cast<double>(kid_best.size());
      const double ex = -mean + c.uct.c_p_explore * std::sqrt(std::log(static_cast<double>(b.visits)));
      flag(std::abs(d.explore_score - ex) <= 1e-9 * std::max(1.0, std::abs(ex)), "exploration score");
      flag(d.chosen ? (*d.chosen == arg && top >= d.explore_score) : d.explore_score > top, "argmax");
    }
    std::vector<NodeView> next;
    for (const TreeNode& n : s.nodes()) {
      double m = std::numeric_limits<double>::infinity();
      for (const auto& x : n.samples) m = std::min(m, x.y);
      flag(n.best.y == m, "node best is the sample minimum");
      for (double v : n.dy) flag(v >= 0.0, "dy >= 0");
      if (n.parent) {
        flag(s.node(*n.parent).best.y <= n.best.y, "parent dominance");
        flag(s.node(*n.parent).visits >= n.visits, "parent visits");
      }
      if (n.id < view.size()) flag(n.visits >= view[n.id].visits, "visit monotonicity");
      next.push_back({n.best.y, std::vector<double>(n.dy.begin(), n.dy.end()), n.visits, n.children});
    }
    view = std::move(next);
  }
  return r;
}

Verdict tree_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(5);
  std::uniform_real_distribution<double> cd(0.0, 20.0), cp(0.0, 2.0), cpe(0.0, 1.0);
  std::uniform_int_distribution<int> win(1, 10);
  MctdConfig cfg = default_mctd_config("ackley", 5);
  cfg.uct.c_d = cd(rng);
  cfg.uct.c_p = cp(rng);
  cfg.uct.c_p_explore = cpe(rng);
  cfg.uct.window = static_cast<std::size_t>(win(rng));
  cfg.uct.window_leaf = static_cast<std::size_t>(win(rng));
  // leaf test off: it compares -y* against an absolute level
  cfg.uct.c_d_leaf = 0.0;
  cfg.uct.c_p_leaf = 0.0;
  cfg.iteration_budget = 10;
  const TreeRun a = tree_run(0.0, cfg, 500, true);
  const TreeRun b = tree_run(100.0, cfg, 500, false);
  const bool same = a.selected == b.selected && a.choices == b.choices && a.expanded == b.expanded;
  std::size_t first_diff = 0;
  while (first_diff < std::min(a.selected.size(), b.selected.size()) && a.selected[first_diff] == b.selected[first_diff] &&
         a.choices[first_diff] == b.choices[first_diff])
    ++first_diff;
  std::size_t expansions = 0;
  for (bool e : a.expanded) expansions += e;
  std::ostringstream os;
  os << a.selected.size() << " iterations, " << expansions << " expansions, " << a.violations << " violations";
  if (a.violations) os << " (first: " << a.first_violation << ")";
  os << ", shifted run " << (same ? "identical" : "diverges at iteration " + std::to_string(first_diff));
  os << ", " << fmt("%.1f s", seconds_since(t0));
  return {a.selected.size() == 500 && a.violations == 0 && same, os.str()};
}

Verdict ackley_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const double m = median_best("mctd", "ackley", 20, 2000);
  const double t = seconds_since(t0);
  return {m <= 2.0 && t < 900.0, fmt("median best %.4f (target <= 2.0), %.1f s", m, t)};
}

Verdict michalewicz_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const double m = median_best("mctd", "michalewicz", 10, 2000);
  const double t = seconds_since(t0);
  return {m <= -8.0 && t < 900.0,
          fmt("median best %.4f (target <= -8.0, optimum %.4f), %.1f s", m, oracle::michalewicz_minimum(10), t)};
}

Verdict random_dominance() {
  const double am = median_best("mctd", "ackley", 20, 1000);
  const double ar = median_best("random", "ackley", 20, 1000);
  const double mm = median_best("mctd", "michalewicz", 10, 1000);
  const double mr = median_best("random", "michalewicz", 10, 1000);
  char buf[256];
  std::snprintf(buf, sizeof buf, "ackley-20d %.4f vs %.4f, michalewicz-10d %.4f vs %.4f", am, ar, mm, mr);
  return {am < ar && mm < mr, buf};
}

Verdict ratio_ablation() {
  auto ratio = [](double d, double b) {
    return [d, b](RunConfig& c) {
      c.mctd.ratio_descent = d;
      c.mctd.ratio_bo = b;
    };
  };
  const double m12 = median_best("mctd", "ackley", 20, 1500, ratio(1.0, 2.0));
  const double m51 = median_best("mctd", "ackley", 20, 1500, ratio(5.0, 1.0));
  return {m12 <= m51, fmt("1:2 median %.4f, 5:1 median %.4f", m12, m51)};
}

Verdict baselines() {
  Objective q("quad", DomainBox::cube(2, -1.0, 1.0),
              [](const Point& x) { return (x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.2) * (x[1] + 0.2); });
  const double nm = nelder_mead_run(q, 200, 0).final_best();
  const double tr = median_best("turbo", "ackley", 10, 500);
  const double rs = median_best("random", "ackley", 10, 500);
  char buf[256];
  std::snprintf(buf, sizeof buf, "nelder-mead %.3g in 200 evals, TR-BO %.4f vs random %.4f", nm, tr, rs);
  return {nm <= 1e-6 && tr < rs, buf};
}

Verdict determinism(const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "mctd_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.json";
  std::ofstream(cfg) << R"({"benchmark": "ackley", "dim": 6, "algorithm": "mctd", "max_evals": 400, "seeds": [3, 8]})";
  std::vector<std::string> files;
  for (const char* tag : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" run \"" + cfg.string() + "\" --out \"" + (root / tag).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "cli invocation failed: " + cmd};
  }
  std::size_t compared = 0, differing = 0;
  for (const char* name : {"trace_seed3.csv", "trace_seed8.csv"}) {
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const std::string x = slurp(root / "a" / name), y = slurp(root / "b" / name);
    ++compared;
    if (x.empty() || x != y) ++differing;
  }
  return {differing == 0, std::to_string(compared) + " trace files compared across two invocations, " +
                              std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  std::string cli = MCTD_CLI_PATH;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--cli", cli, "path of the mctd executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"GP posterior and likelihood match a dense oracle", gp_oracle},
      {"expected improvement matches Monte Carlo", ei_check},
      {"descent steps never worsen and count calls exactly", descent_suite},
      {"tree invariants and shift-invariant selection", tree_suite},
      {"ackley-20d median best <= 2.0 at 2000 evals", ackley_check},
      {"michalewicz-10d median best <= -8.0 at 2000 evals", michalewicz_check},
      {"MCTD beats random search at 1000 evals", random_dominance},
      {"budget ratio 1:2 no worse than 5:1", ratio_ablation},
      {"baseline sanity", baselines},
      {"byte-identical traces across invocations", [&cli] { return determinism(cli); }},
  };
  const std::set<int> chosen(only.begin(), only.end());
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!chosen.empty() && !chosen.contains(id)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %d: %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
