#pragma once

#include <cstddef>
#include <vector>

#include "mctd/domain.hpp"
#include "mctd/gp.hpp"

namespace mctd {

struct TrConfig {
  double length_init = 0.8;
  double length_min = 1.0 / 128.0;
  double length_max = 1.6;
  std::size_t success_tolerance = 3;
  std::size_t failure_tolerance = 4;
  std::size_t batch = 5;
  std::size_t candidate_cap = 2000;

  // fail_tol = max(4, ceil(dim / batch)).
  static TrConfig for_dim(std::size_t dim, std::size_t batch = 5);
  // min(100 * dim, candidate_cap)
  std::size_t candidate_count(std::size_t dim) const;
};

// Hyper-rectangular trust region in unit-cube units.
struct TrustRegion {
  double length = 0.8;
  std::size_t success_streak = 0;
  std::size_t failure_streak = 0;
  Point center;
  // Set when a halving would have taken length below length_min. The in-tree
  // optimizer ignores it (no restarts); the standalone baseline restarts on it.
  bool collapsed = false;
};

TrustRegion init_tr(const TrConfig& cfg = {});

TrustRegion update_tr(TrustRegion tr, bool improved, const TrConfig& cfg = {});

struct TrBox {
  Point lower;  // unit-cube
  Point upper;
};

// Box centred at `center_unit` with side length * lengthscale_i / mean(lengthscales)
// (unit-cube units, i.e. times each box width in original units), clipped
// to [0, 1].
TrBox trust_region_box(const Point& center_unit, double length, const Eigen::VectorXd& lengthscales);

struct BoStepResult {
  std::vector<Sample> evaluated;
  TrustRegion tr;
  bool improved = false;
  bool used_model = false;
  TrBox box;  // the unit-cube box candidates were drawn from
};

// One trust-region BO step on the node's samples: fit a GP, shape the
// trust region around the best sample, draw candidates in it, pick `batch`
// by Thompson sampling and evaluate them. GP failure (or fewer than two
// samples) falls back to uniform draws in the trust region.
BoStepResult bo_step(const std::vector<Sample>& samples, const TrustRegion& tr, Objective& obj,
                     Rng& rng, std::size_t batch, const TrConfig& cfg = {},
                     const FitOptions& fit = {});

struct LocalBoOutcome {
  std::vector<Sample> evaluated;
  TrustRegion tr;
  std::size_t steps = 0;
  std::size_t ground_truth_calls = 0;
};

// bo_step with batch = min(cfg.batch, remaining) until `budget` calls are
// spent. New samples are appended to `samples` as they arrive.
LocalBoOutcome local_bo_run(std::vector<Sample>& samples, const TrustRegion& tr, Objective& obj,
                            std::size_t budget, Rng& rng, const TrConfig& cfg = {},
                            const FitOptions& fit = {});

}  // namespace mctd
