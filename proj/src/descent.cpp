#include "mctd/descent.hpp"

#include <algorithm>
#include <cmath>

#include "mctd/sampling.hpp"

namespace mctd {

void DescentConfig::validate() const {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ContractViolation("DescentConfig: alpha0 must be in (0, 1]");
  if (n_directions < 1) throw ContractViolation("DescentConfig: n_directions must be >= 1");
  if (fine_budget < 3) throw ContractViolation("DescentConfig: fine_budget must be >= 3");
  if (max_walk < 1) throw ContractViolation("DescentConfig: max_walk must be >= 1");
}

Eigen::VectorXd step_size(std::size_t visits, std::size_t level, double alpha0,
                          double corr_scalar, const DomainBox& box) {
  if (visits < 1) throw ContractViolation("step_size: visits must be >= 1");
  const double denom =
      std::sqrt(static_cast<double>(visits) * (static_cast<double>(level) + 1.0));
  return (box.widths() * (alpha0 * corr_scalar / denom));
}

Point rescale_by_lengths(const Point& dx, const Eigen::VectorXd& lengths) {
  const Point shaped = (dx.array() * lengths.array()).matrix();
  const double sn = shaped.norm();
  if (sn == 0.0) return dx;
  return shaped * (dx.norm() / sn);
}

Point propose_direction(const GpModel* model, const Point& x_best, double best_y,
                        const Eigen::VectorXd& alpha, std::size_t n, Rng& rng) {
  const auto d = static_cast<std::size_t>(alpha.size());
  if (model == nullptr) {
    const Point shaped = (random_unit_vector(d, rng).array() * alpha.array()).matrix();
    return shaped * (0.5 * alpha.norm() / shaped.norm());
  }
  const Eigen::MatrixXd lhs = latin_hypercube_unit(std::max<std::size_t>(n, 1), d, rng);
  const DomainBox& box = model->box();
  std::vector<Point> offsets;
  std::vector<Point> targets;
  offsets.reserve(static_cast<std::size_t>(lhs.rows()));
  targets.reserve(static_cast<std::size_t>(lhs.rows()));
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    const Point raw = ((lhs.row(i).transpose().array() - 0.5) * alpha.array()).matrix();
    Point dx = rescale_by_lengths(raw, model->params().lengthscales);
    targets.push_back(box.clip(x_best + dx));
    offsets.push_back(std::move(dx));
  }
  const auto pred = model->predict_batch(targets);
  std::size_t best = 0;
  double best_ei = -1.0;
  double best_mean = 0.0;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double ei = expected_improvement(pred.mean[k], std::sqrt(pred.variance[k]), best_y);
    if (ei > best_ei || (ei == best_ei && pred.mean[k] < best_mean)) {
      best = i;
      best_ei = ei;
      best_mean = pred.mean[k];
    }
  }
  return offsets[best];
}

namespace {

void take(DescentOutcome& out, const Sample& s) {
  out.evaluated.push_back(s);
  ++out.ground_truth_calls;
  if (s.y < out.new_best.y) {
    out.new_best = s;
    out.improved = true;
  }
}

std::size_t allowed(const Objective& obj, std::size_t budget) {
  return std::min(budget, obj.remaining());
}

}  // namespace

DescentOutcome stp_basic_step(Objective& obj, const Sample& x, const Point& dx,
                              std::size_t budget) {
  if (dx.norm() == 0.0) throw ContractViolation("stp_basic_step: dx must be nonzero");
  DescentOutcome out;
  out.new_best = x;
  const std::size_t calls = allowed(obj, budget);
  if (calls >= 1) take(out, obj.evaluate(x.x + dx));
  if (calls >= 2) take(out, obj.evaluate(x.x - dx));
  return out;
}

DescentOutcome stp_oracle_step(Objective& obj, const GpModel& model, const Sample& x_best,
                               const Point& dx, std::size_t max_walk) {
  const DomainBox& box = obj.box();
  auto g = [&](std::size_t k) {
    return model.predict(box.clip(x_best.x + static_cast<double>(k) * dx)).mean;
  };
  std::size_t k = 0;
  double gk = g(0);
  while (k < max_walk) {
    const double next = g(k + 1);
    if (!(next < gk)) break;
    gk = next;
    ++k;
  }
  k = std::max<std::size_t>(k, 1);
  DescentOutcome out;
  out.new_best = x_best;
  out.multiplier = static_cast<double>(k);
  if (allowed(obj, 1) >= 1) take(out, obj.evaluate(x_best.x + static_cast<double>(k) * dx));
  return out;
}

double fine_bracket_search(const std::function<double(double)>& g, std::size_t fine_budget) {
  // Bracket (centre - below, centre, centre + above). A centre win halves both
  // offsets; an endpoint win moves the centre there with the near offset at
  // half the old one and the far bound at twice the old distance.
  double centre = 0.0;
  double below = 1.0;
  double above = 1.0;
  double g_centre = g(centre);
  double g_lo = g(centre - below);
  double g_hi = g(centre + above);
  std::size_t used = 3;
  for (;;) {
    if (g_lo < g_centre && g_lo <= g_hi) {
      const double step = below;
      centre -= step;
      g_centre = g_lo;
      above = step / 2.0;
      below = step;
    } else if (g_hi < g_centre) {
      const double step = above;
      centre += step;
      g_centre = g_hi;
      below = step / 2.0;
      above = step;
    } else {
      below /= 2.0;
      above /= 2.0;
    }
    if (used + 2 > fine_budget) break;
    g_lo = g(centre - below);
    g_hi = g(centre + above);
    used += 2;
  }
  return centre;
}

DescentOutcome stp_fine_step(Objective& obj, const GpModel& model, const Sample& x_best,
                             const Point& dx, std::size_t fine_budget) {
  const DomainBox& box = obj.box();
  const double k0 = fine_bracket_search(
      [&](double k) { return model.predict(box.clip(x_best.x + k * dx)).mean; },
      std::max<std::size_t>(fine_budget, 3));
  DescentOutcome out;
  out.new_best = x_best;
  out.multiplier = k0;
  if (allowed(obj, 1) >= 1) take(out, obj.evaluate(x_best.x + k0 * dx));
  return out;
}

DescentOutcome descend(const DescentContext& ctx, Objective& obj, const GpModel* model,
                       const DescentConfig& config, std::size_t budget, Rng& rng) {
  DescentOutcome total;
  total.new_best = ctx.best;
  const Eigen::VectorXd alpha =
      step_size(std::max<std::size_t>(ctx.visits, 1), ctx.level, config.alpha0, ctx.corr_scalar,
                obj.box());
  while (total.ground_truth_calls < budget && !obj.exhausted()) {
    const Point dx = propose_direction(model, total.new_best.x, total.new_best.y, alpha,
                                       config.n_directions, rng);
    const std::size_t left = budget - total.ground_truth_calls;
    DescentOutcome step;
    if (model == nullptr)
      step = stp_basic_step(obj, total.new_best, dx, left);
    else if (total.new_best.y < config.switch_threshold)
      step = stp_fine_step(obj, *model, total.new_best, dx, config.fine_budget);
    else
      step = stp_oracle_step(obj, *model, total.new_best, dx, config.max_walk);
    for (const Sample& s : step.evaluated) take(total, s);
    if (step.ground_truth_calls == 0) break;
  }
  return total;
}

}  // namespace mctd
