#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "mctd/domain.hpp"
#include "mctd/gp.hpp"

namespace mctd {

struct DescentConfig {
  double alpha0 = 0.2;  // step size as a fraction of each dimensional length
  // Fine-grained line search replaces the oracle walk once the node best
  // drops below this value.
  double switch_threshold = -std::numeric_limits<double>::infinity();
  std::size_t n_directions = 64;
  std::size_t fine_budget = 16;  // surrogate evaluations per fine line search
  std::size_t max_walk = 10;     // cap on the oracle walk multiplier

  void validate() const;
};

struct DescentOutcome {
  Sample new_best;
  std::size_t ground_truth_calls = 0;
  bool improved = false;
  // Ground-truth samples in evaluation order.
  std::vector<Sample> evaluated;
  // Multiplier of dx at which the single ground-truth call of an oracle or
  // fine step was made (0 for basic steps).
  double multiplier = 0.0;
};

// alpha0 * width_i * corr_scalar / sqrt(visits * (level + 1)).
Eigen::VectorXd step_size(std::size_t visits, std::size_t level, double alpha0,
                          double corr_scalar, const DomainBox& box);

// dx * L * |dx| / |dx * L| (elementwise products): reshapes dx along the
// correlation lengths without changing its norm.
Point rescale_by_lengths(const Point& dx, const Eigen::VectorXd& lengths);

// Without a model: a uniform random direction shaped by alpha and scaled to
// the half-diagonal |alpha| / 2 of the alpha-box. With a model: n Latin
// hypercube offsets in the box of edge alpha centred on zero, each reshaped
// by the model's lengthscales, and the one with the largest expected
// improvement at x_best + dx wins (lower posterior mean breaks ties).
Point propose_direction(const GpModel* model, const Point& x_best, double best_y,
                        const Eigen::VectorXd& alpha, std::size_t n, Rng& rng);

// Evaluates x + dx and x - dx and keeps the best of the three. `budget`
// limits the calls; with one call left only x + dx is tried.
DescentOutcome stp_basic_step(Objective& obj, const Sample& x, const Point& dx,
                              std::size_t budget = 2);

// Walks k while the posterior mean keeps decreasing along dx (k capped at
// max_walk, at least 1), then makes one ground-truth call at x + k dx.
DescentOutcome stp_oracle_step(Objective& obj, const GpModel& model, const Sample& x_best,
                               const Point& dx, std::size_t max_walk = 10);

// Bracketing line search on the posterior mean along dx with at most
// fine_budget surrogate evaluations, then one ground-truth call at the
// bracket centre.
DescentOutcome stp_fine_step(Objective& obj, const GpModel& model, const Sample& x_best,
                             const Point& dx, std::size_t fine_budget);

// Multiplier chosen by the fine-grained bracket search for a 1-d function of
// the multiplier; exposed for testing.
double fine_bracket_search(const std::function<double(double)>& g, std::size_t fine_budget);

struct DescentContext {
  Sample best;
  std::size_t visits = 1;
  std::size_t level = 0;
  double corr_scalar = 1.0;
};

// Repeated STP steps from ctx.best until `budget` ground-truth calls are
// spent (or the objective is exhausted). Uses the oracle path iff model is
// non-null, and the fine-grained step when the running best is below the
// switch threshold.
DescentOutcome descend(const DescentContext& ctx, Objective& obj, const GpModel* model,
                       const DescentConfig& config, std::size_t budget, Rng& rng);

}  // namespace mctd
