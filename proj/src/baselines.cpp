#include "mctd/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "mctd/sampling.hpp"

namespace mctd {

namespace {

using Clock = std::chrono::steady_clock;

RunTrace make_trace(const Objective& obj, const char* algorithm, std::uint64_t seed) {
  RunTrace t;
  t.algorithm = algorithm;
  t.benchmark = obj.name();
  t.dim = obj.dim();
  t.seed = seed;
  return t;
}

// Restores the objective's limit on scope exit.
class LimitGuard {
 public:
  LimitGuard(Objective& obj, std::size_t max_evals) : obj_(obj), old_(obj.eval_limit()) {
    obj_.set_eval_limit(obj_.eval_count() + max_evals);
  }
  ~LimitGuard() { obj_.set_eval_limit(old_); }

 private:
  Objective& obj_;
  std::optional<std::size_t> old_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

RunTrace random_search_run(Objective& obj, std::size_t max_evals, std::uint64_t seed) {
  if (max_evals < 1) throw ContractViolation("random_search_run: max_evals must be >= 1");
  const auto t0 = Clock::now();
  RunTrace trace = make_trace(obj, "random", seed);
  const std::string tag = "random";
  {
    LimitGuard guard(obj, max_evals);
    TraceRecorder rec(obj, trace, tag);
    Rng rng(seed);
    while (!obj.exhausted()) obj.evaluate(sample_uniform(obj.box(), rng));
  }
  trace.wall_time_s = seconds_since(t0);
  return trace;
}

void shrink_simplex(std::vector<Point>& vertices, double sigma) {
  for (std::size_t i = 1; i < vertices.size(); ++i)
    vertices[i] = vertices[0] + sigma * (vertices[i] - vertices[0]);
}

double simplex_diameter(const std::vector<Point>& vertices) {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      d = std::max(d, (vertices[i] - vertices[j]).norm());
  return d;
}

RunTrace nelder_mead_run(Objective& obj, std::size_t max_evals, std::uint64_t seed,
                         const NelderMeadCoefficients& coef) {
  const std::size_t dim = obj.dim();
  if (max_evals < dim + 2) throw ContractViolation("nelder_mead_run: max_evals must be >= dim + 2");
  const auto t0 = Clock::now();
  RunTrace trace = make_trace(obj, "nelder-mead", seed);
  const std::string tag = "nelder-mead";
  {
    LimitGuard guard(obj, max_evals);
    TraceRecorder rec(obj, trace, tag);
    Rng rng(seed);
    const DomainBox& box = obj.box();

    std::vector<Point> v;
    std::vector<double> f;
    v.push_back(sample_uniform(box, rng));
    for (std::size_t i = 0; i < dim; ++i) {
      Point p = v[0];
      const auto k = static_cast<Eigen::Index>(i);
      const double step = 0.05 * box.width(i);
      p[k] = p[k] + step <= box.upper(i) ? p[k] + step : p[k] - step;
      v.push_back(p);
    }
    auto eval = [&](const Point& x, Point& stored) -> std::optional<double> {
      if (obj.exhausted()) return std::nullopt;
      const Sample s = obj.evaluate(x);
      stored = s.x;
      return s.y;
    };
    for (auto& p : v) {
      const auto y = eval(p, p);
      if (!y) break;
      f.push_back(*y);
    }

    std::vector<std::size_t> order(v.size());
    while (f.size() == v.size() && !obj.exhausted()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return f[a] < f[b]; });
      std::vector<Point> sv;
      std::vector<double> sf;
      for (auto i : order) {
        sv.push_back(v[i]);
        sf.push_back(f[i]);
      }
      v = std::move(sv);
      f = std::move(sf);

      const std::size_t worst = dim;
      Point c = Point::Zero(static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i) c += v[i];
      c /= static_cast<double>(dim);

      Point xr;
      const auto fr = eval(c + coef.reflection * (c - v[worst]), xr);
      if (!fr) break;
      if (*fr < f[0]) {
        Point xe;
        const auto fe = eval(c + coef.expansion * (xr - c), xe);
        if (fe && *fe < *fr) {
          v[worst] = xe;
          f[worst] = *fe;
        } else {
          v[worst] = xr;
          f[worst] = *fr;
        }
        continue;
      }
      if (*fr < f[worst - 1]) {
        v[worst] = xr;
        f[worst] = *fr;
        continue;
      }
      bool accepted = false;
      if (*fr < f[worst]) {
        Point xc;
        const auto fc = eval(c + coef.contraction_outside * (xr - c), xc);
        if (!fc) break;
        if (*fc <= *fr) {
          v[worst] = xc;
          f[worst] = *fc;
          accepted = true;
        }
      } else {
        Point xcc;
        const auto fcc = eval(c + coef.contraction_inside * (v[worst] - c), xcc);
        if (!fcc) break;
        if (*fcc < f[worst]) {
          v[worst] = xcc;
          f[worst] = *fcc;
          accepted = true;
        }
      }
      if (!accepted) {
        shrink_simplex(v, coef.shrink);
        for (std::size_t i = 1; i < v.size(); ++i) {
          const auto y = eval(v[i], v[i]);
          if (!y) break;
          f[i] = *y;
        }
      }
    }
  }
  trace.wall_time_s = seconds_since(t0);
  return trace;
}

RunTrace turbo_baseline_run(Objective& obj, std::size_t max_evals, std::uint64_t seed,
                            const TurboOptions& opts, TurboLog* log) {
  if (max_evals < opts.n_init) throw ContractViolation("turbo_baseline_run: max_evals below the initial design size");
  const auto t0 = Clock::now();
  RunTrace trace = make_trace(obj, "turbo", seed);
  std::string tag = "turbo";
  {
    LimitGuard guard(obj, max_evals);
    TraceRecorder rec(obj, trace, tag);
    Rng rng(seed);
    const TrConfig cfg = TrConfig::for_dim(obj.dim(), opts.batch);
    std::vector<Sample> samples;
    TrustRegion tr = init_tr(cfg);
    bool fresh = true;
    while (!obj.exhausted()) {
      if (fresh) {
        if (log && !samples.empty()) {
          ++log->restarts;
          log->restart_at.push_back(obj.eval_count());
        }
        samples.clear();
        tr = init_tr(cfg);
        tag = "turbo-init";
        for (const Point& p : latin_hypercube(obj.box(), opts.n_init, rng)) {
          if (obj.exhausted()) break;
          samples.push_back(obj.evaluate(p));
        }
        tag = "turbo";
        fresh = false;
        continue;
      }
      if (log) log->step_lengths.push_back(tr.length);
      BoStepResult step = bo_step(samples, tr, obj, rng, cfg.batch, cfg, opts.fit);
      if (step.evaluated.empty()) break;
      for (Sample& s : step.evaluated) samples.push_back(std::move(s));
      tr = step.tr;
      if (tr.collapsed) fresh = true;
    }
  }
  trace.wall_time_s = seconds_since(t0);
  return trace;
}

}  // namespace mctd
