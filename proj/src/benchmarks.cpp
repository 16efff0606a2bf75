#include "mctd/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mctd {

double ackley(const Point& x) {
  constexpr double a = 20.0;
  constexpr double b = 0.2;
  constexpr double c = 2.0 * std::numbers::pi;
  const auto n = static_cast<double>(x.size());
  double sq = 0.0;
  double cs = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sq += x[i] * x[i];
    cs += std::cos(c * x[i]);
  }
  return -a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::numbers::e;
}

double michalewicz(const Point& x) {
  constexpr int m = 10;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double inner = std::sin(static_cast<double>(i + 1) * xi * xi / std::numbers::pi);
    sum += std::sin(xi) * std::pow(inner, 2 * m);
  }
  return -sum;
}

namespace {

// splitmix64 finalizer; fixes the table independently of any std:: engine.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_hash(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = mix(mix(a) ^ (b * 0xd1b54a32d192ed03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

int layer_type(double v) {
  return static_cast<int>(std::clamp(std::lround(v), 1L, 5L));
}

}  // namespace

double tabular_cost(const Point& x) {
  double cost = 5.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto pos = static_cast<std::uint64_t>(i);
    const auto t = static_cast<std::uint64_t>(layer_type(x[i]));
    cost += 4.0 * unit_hash(pos, t);
    if (i + 1 < x.size()) {
      const auto u = static_cast<std::uint64_t>(layer_type(x[i + 1]));
      cost += 1.5 * unit_hash(1000 + pos, 5 * t + u);
    }
  }
  return cost;
}

double tabular_minimum(std::size_t dim) {
  if (dim == 0 || dim > 8) throw ContractViolation("tabular_minimum: dim must be in [1, 8]");
  std::size_t cells = 1;
  for (std::size_t i = 0; i < dim; ++i) cells *= 5;
  double best = std::numeric_limits<double>::infinity();
  Point x(static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < cells; ++c) {
    std::size_t r = c;
    for (std::size_t i = 0; i < dim; ++i) {
      x[static_cast<Eigen::Index>(i)] = static_cast<double>(r % 5 + 1);
      r /= 5;
    }
    best = std::min(best, tabular_cost(x));
  }
  return best;
}

Point quantize_point(const DomainBox& box, const std::vector<std::size_t>& levels,
                     const Point& x) {
  Point out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double n = static_cast<double>(levels[k]);
    const double cell_w = box.width(k) / n;
    const double cell = std::clamp(std::floor((x[i] - box.lower(k)) / cell_w), 0.0, n - 1.0);
    out[i] = box.lower(k) + (cell + 0.5) * cell_w;
  }
  return out;
}

Objective quantize_wrap(const Objective& obj, const std::vector<std::size_t>& levels) {
  if (levels.size() != obj.dim())
    throw ContractViolation("quantize_wrap: one level count per dimension required");
  for (auto l : levels)
    if (l < 2) throw ContractViolation("quantize_wrap: levels must be >= 2");
  DomainBox box = obj.box();
  EvalFn inner = obj.eval_fn();
  EvalFn fn = [box, levels, inner](const Point& x) {
    return inner(quantize_point(box, levels, x));
  };
  return Objective(obj.name(), obj.box(), std::move(fn), obj.known_optimum());
}

const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{"ackley", "michalewicz", "quantized-tabular"};
  return names;
}

Objective make_benchmark(std::string_view name, std::size_t dim) {
  if (dim == 0) throw ContractViolation("make_benchmark: dim must be positive");
  if (name == "ackley")
    return Objective("ackley", DomainBox::cube(dim, -5.0, 10.0), ackley, 0.0);
  if (name == "michalewicz")
    return Objective("michalewicz", DomainBox::cube(dim, 0.0, std::numbers::pi), michalewicz);
  if (name == "quantized-tabular") {
    std::optional<double> opt;
    if (dim <= 6) opt = tabular_minimum(dim);
    Objective inner("quantized-tabular", DomainBox::cube(dim, 0.5, 5.5), tabular_cost, opt);
    return quantize_wrap(inner, std::vector<std::size_t>(dim, 5));
  }
  throw ContractViolation("unknown benchmark '" + std::string(name) + "'");
}

}  // namespace mctd
