#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mctd/domain.hpp"

namespace mctd {

// Ackley with a = 20, b = 0.2, c = 2*pi. Global minimum 0 at the origin.
double ackley(const Point& x);

// Michalewicz with steepness m = 10, indices counted from 1.
double michalewicz(const Point& x);

// Synthetic lookup table over {1..5}^d standing in for a tabular
// architecture benchmark. Coordinates are rounded to the nearest integer and
// clamped into [1, 5]; the value is a fixed per-position cost plus a coupling
// term between neighbouring positions. Deterministic across processes.
double tabular_cost(const Point& x);

// Minimum of tabular_cost over the full grid, by enumeration. Only for
// dim <= 8 (5^8 cells).
double tabular_minimum(std::size_t dim);

// Wraps obj so that each coordinate snaps to the centre of one of
// `levels[i]` equal-width cells of the box before the inner function runs.
// The returned objective has a fresh counter.
Objective quantize_wrap(const Objective& obj, const std::vector<std::size_t>& levels);

// Snaps x onto the cell centres used by quantize_wrap.
Point quantize_point(const DomainBox& box, const std::vector<std::size_t>& levels,
                     const Point& x);

// Registry: "ackley" ([-5, 10]^d), "michalewicz" ([0, pi]^d),
// "quantized-tabular" ([0.5, 5.5]^d, 5 levels). Throws ContractViolation on
// an unknown name.
Objective make_benchmark(std::string_view name, std::size_t dim);

const std::vector<std::string>& benchmark_names();

}  // namespace mctd
