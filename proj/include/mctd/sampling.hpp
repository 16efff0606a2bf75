#pragma once

#include <cstddef>
#include <vector>

#include "mctd/domain.hpp"

namespace mctd {

Point sample_uniform(const DomainBox& box, Rng& rng);

// n points; along every axis each of the n equal-width strata holds exactly one.
std::vector<Point> latin_hypercube(const DomainBox& box, std::size_t n, Rng& rng);

// Same, on the unit cube [0, 1]^dim, returned as rows of an n x dim matrix.
Eigen::MatrixXd latin_hypercube_unit(std::size_t n, std::size_t dim, Rng& rng);

// Uniform direction on the unit sphere.
Point random_unit_vector(std::size_t dim, Rng& rng);

}  // namespace mctd
