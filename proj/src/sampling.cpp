#include "mctd/sampling.hpp"

#include <algorithm>
#include <numeric>

namespace mctd {

Point sample_uniform(const DomainBox& box, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point x(static_cast<Eigen::Index>(box.dim()));
  for (std::size_t i = 0; i < box.dim(); ++i)
    x[static_cast<Eigen::Index>(i)] = box.lower(i) + u(rng) * box.width(i);
  return x;
}

Eigen::MatrixXd latin_hypercube_unit(std::size_t n, std::size_t dim, Rng& rng) {
  if (n == 0) throw ContractViolation("latin_hypercube: n must be >= 1");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> perm(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < dim; ++j) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Fisher-Yates with an explicit draw so the permutation does not depend on
    // the standard library's shuffle implementation.
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(perm[i - 1], perm[pick(rng)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + u(rng)) * inv_n;
      // Keep the value inside its stratum even when u(rng) rounds up.
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::min(v, (static_cast<double>(perm[i]) + 1.0) * inv_n - 1e-15);
    }
  }
  return out;
}

std::vector<Point> latin_hypercube(const DomainBox& box, std::size_t n, Rng& rng) {
  const Eigen::MatrixXd unit = latin_hypercube_unit(n, box.dim(), rng);
  std::vector<Point> pts;
  pts.reserve(n);
  for (Eigen::Index i = 0; i < unit.rows(); ++i) pts.push_back(box.from_unit(unit.row(i).transpose()));
  return pts;
}

Point random_unit_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Point v(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  while (norm < 1e-12) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace mctd
