#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mctd/domain.hpp"
#include "mctd/gp.hpp"
#include "mctd/local_bo.hpp"
#include "mctd/trace.hpp"

namespace mctd {

RunTrace random_search_run(Objective& obj, std::size_t max_evals, std::uint64_t seed);

struct NelderMeadCoefficients {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction_outside = 0.5;
  double contraction_inside = 0.5;
  double shrink = 0.5;
};

// Initial simplex: a uniform vertex plus dim vertices offset along each axis
// by 5% of the width (towards the interior when the offset would leave the box).
RunTrace nelder_mead_run(Objective& obj, std::size_t max_evals, std::uint64_t seed,
                         const NelderMeadCoefficients& coef = {});

// Vertices other than the first contract towards it by `sigma`.
void shrink_simplex(std::vector<Point>& vertices, double sigma);
double simplex_diameter(const std::vector<Point>& vertices);

struct TurboOptions {
  std::size_t n_init = 20;
  std::size_t batch = 5;
  FitOptions fit{};
};

struct TurboLog {
  std::size_t restarts = 0;
  // Trust-region length at the start of every BO step.
  std::vector<double> step_lengths;
  // Number of evaluations completed when each restart began.
  std::vector<std::size_t> restart_at;
};

// Single trust-region BO with Latin-hypercube initialization; restarts from a
// fresh design whenever the trust region collapses.
RunTrace turbo_baseline_run(Objective& obj, std::size_t max_evals, std::uint64_t seed,
                            const TurboOptions& opts = {}, TurboLog* log = nullptr);

}  // namespace mctd
