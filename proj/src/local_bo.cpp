#include "mctd/local_bo.hpp"

#include <algorithm>
#include <cmath>

#include "mctd/sampling.hpp"

namespace mctd {

TrConfig TrConfig::for_dim(std::size_t dim, std::size_t batch) {
  TrConfig cfg;
  cfg.batch = std::max<std::size_t>(batch, 1);
  cfg.failure_tolerance = std::max<std::size_t>(4, (dim + cfg.batch - 1) / cfg.batch);
  return cfg;
}

std::size_t TrConfig::candidate_count(std::size_t dim) const {
  return std::min(100 * dim, candidate_cap);
}

TrustRegion init_tr(const TrConfig& cfg) {
  TrustRegion tr;
  tr.length = cfg.length_init;
  return tr;
}

TrustRegion update_tr(TrustRegion tr, bool improved, const TrConfig& cfg) {
  tr.collapsed = false;
  if (improved) {
    ++tr.success_streak;
    tr.failure_streak = 0;
  } else {
    ++tr.failure_streak;
    tr.success_streak = 0;
  }
  if (tr.success_streak >= cfg.success_tolerance) {
    tr.length = std::min(2.0 * tr.length, cfg.length_max);
    tr.success_streak = 0;
  } else if (tr.failure_streak >= cfg.failure_tolerance) {
    tr.length /= 2.0;
    tr.failure_streak = 0;
    if (tr.length < cfg.length_min) {
      tr.length = cfg.length_min;
      tr.collapsed = true;
    }
  }
  tr.length = std::clamp(tr.length, cfg.length_min, cfg.length_max);
  return tr;
}

TrBox trust_region_box(const Point& center_unit, double length,
                       const Eigen::VectorXd& lengthscales) {
  const Eigen::VectorXd w = lengthscales / lengthscales.mean();
  const Eigen::VectorXd half = w * (0.5 * length);
  TrBox b;
  b.lower = (center_unit - half).cwiseMax(0.0);
  b.upper = (center_unit + half).cwiseMin(1.0);
  return b;
}

namespace {

const Sample& best_of(const std::vector<Sample>& samples) {
  return *std::min_element(samples.begin(), samples.end(),
                           [](const Sample& a, const Sample& b) { return a.y < b.y; });
}

// Latin hypercube draws in the box; each candidate perturbs every coordinate
// with probability min(20 / dim, 1) and keeps the centre value elsewhere.
std::vector<Point> draw_candidates(const TrBox& tb, const Point& center_unit, std::size_t count,
                                   const DomainBox& box, Rng& rng) {
  const auto d = static_cast<std::size_t>(center_unit.size());
  const Eigen::MatrixXd lhs = latin_hypercube_unit(count, d, rng);
  const double p_perturb = std::min(20.0 / static_cast<double>(d), 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, d - 1);
  std::vector<Point> out;
  out.reserve(count);
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    Point c = center_unit;
    bool any = false;
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      if (p_perturb >= 1.0 || u(rng) < p_perturb) {
        c[j] = tb.lower[j] + lhs(i, j) * (tb.upper[j] - tb.lower[j]);
        any = true;
      }
    }
    if (!any) {
      const auto j = static_cast<Eigen::Index>(pick(rng));
      c[j] = tb.lower[j] + lhs(i, j) * (tb.upper[j] - tb.lower[j]);
    }
    out.push_back(box.clip(box.from_unit(c)));
  }
  return out;
}

}  // namespace

BoStepResult bo_step(const std::vector<Sample>& samples, const TrustRegion& tr, Objective& obj,
                     Rng& rng, std::size_t batch, const TrConfig& cfg, const FitOptions& fit) {
  const DomainBox& box = obj.box();
  const std::size_t d = box.dim();
  BoStepResult res;
  res.tr = tr;
  batch = std::min(batch, obj.remaining());
  if (batch == 0) return res;

  double prior_best = std::numeric_limits<double>::infinity();
  Point center_unit = Point::Constant(static_cast<Eigen::Index>(d), 0.5);
  if (!samples.empty()) {
    const Sample& b = best_of(samples);
    prior_best = b.y;
    res.tr.center = b.x;
    center_unit = box.to_unit(b.x);
  }

  std::optional<GpModel> model;
  if (samples.size() >= 2) {
    try {
      model.emplace(fit_gp(samples, box, rng, fit));
    } catch (const std::runtime_error&) {
      model.reset();
    }
  }

  std::vector<Point> chosen;
  if (model) {
    res.used_model = true;
    res.box = trust_region_box(center_unit, tr.length, model->params().lengthscales);
    const std::size_t count = std::max(cfg.candidate_count(d), batch);
    const std::vector<Point> cands = draw_candidates(res.box, center_unit, count, box, rng);
    for (std::size_t i : thompson_select(*model, cands, rng, batch)) chosen.push_back(cands[i]);
  } else {
    res.box = trust_region_box(center_unit, tr.length,
                               Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)));
    const DomainBox tr_box(
        std::vector<double>(res.box.lower.data(), res.box.lower.data() + d),
        std::vector<double>(res.box.upper.data(), res.box.upper.data() + d));
    for (std::size_t i = 0; i < batch; ++i)
      chosen.push_back(box.clip(box.from_unit(sample_uniform(tr_box, rng))));
  }

  for (const Point& x : chosen) {
    if (obj.exhausted()) break;
    Sample s = obj.evaluate(x);
    if (s.y < prior_best) res.improved = true;
    res.evaluated.push_back(std::move(s));
  }
  res.tr = update_tr(res.tr, res.improved, cfg);
  return res;
}

LocalBoOutcome local_bo_run(std::vector<Sample>& samples, const TrustRegion& tr, Objective& obj,
                            std::size_t budget, Rng& rng, const TrConfig& cfg,
                            const FitOptions& fit) {
  LocalBoOutcome out;
  out.tr = tr;
  while (out.ground_truth_calls < budget && !obj.exhausted()) {
    const std::size_t batch = std::min(cfg.batch, budget - out.ground_truth_calls);
    BoStepResult step = bo_step(samples, out.tr, obj, rng, batch, cfg, fit);
    ++out.steps;
    out.tr = step.tr;
    if (step.evaluated.empty()) break;
    out.ground_truth_calls += step.evaluated.size();
    for (Sample& s : step.evaluated) {
      samples.push_back(s);
      out.evaluated.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace mctd
