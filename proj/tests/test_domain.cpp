#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "mctd/benchmarks.hpp"
#include "mctd/domain.hpp"
#include "mctd/sampling.hpp"
#include "oracles.hpp"

using namespace mctd;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

oracle::Vec vec(const Point& p) { return {p.data(), p.data() + p.size()}; }

}  // namespace

TEST_CASE("box construction rejects malformed bounds") {
  CHECK_THROWS_AS(DomainBox({0.0, 1.0}, {1.0}), ContractViolation);
  CHECK_THROWS_AS(DomainBox({0.0}, {0.0}), ContractViolation);
  CHECK_THROWS_AS(DomainBox({}, {}), ContractViolation);
  const DomainBox b = DomainBox::cube(3, -5.0, 10.0);
  CHECK(b.dim() == 3);
  CHECK(b.width(1) == 15.0);
}

TEST_CASE("unit normalization round-trips and clip projects") {
  const DomainBox b({-5.0, 0.0}, {10.0, 2.0});
  const Point x = pt({2.5, 0.5});
  CHECK((b.from_unit(b.to_unit(x)) - x).norm() < 1e-14);
  CHECK(b.to_unit(x)[0] == doctest::Approx(0.5));
  const Point c = b.clip(pt({20.0, -1.0}));
  CHECK(c[0] == 10.0);
  CHECK(c[1] == 0.0);
  CHECK(b.contains(c));
  CHECK_FALSE(b.contains(pt({20.0, 1.0})));
}

TEST_CASE("evaluate counts, clips and is deterministic") {
  Objective obj = make_benchmark("ackley", 2);
  CHECK(obj.eval_count() == 0);
  const Sample s = obj.evaluate(Point::Zero(2));
  CHECK(s.y == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(obj.eval_count() == 1);
  CHECK(s.index == 1);

  Objective obj2 = make_benchmark("ackley", 2);
  const Sample a = obj2.evaluate(pt({1.3, -2.0}));
  const Sample b = obj2.evaluate(pt({1.3, -2.0}));
  CHECK(a.y == b.y);
  CHECK(obj2.eval_count() == 2);
  CHECK(b.index > a.index);

  const Sample out = obj2.evaluate(pt({50.0, -50.0}));
  CHECK(out.x[0] == 10.0);
  CHECK(out.x[1] == -5.0);
  CHECK(out.y == ackley(pt({10.0, -5.0})));
  CHECK_THROWS_AS(obj2.evaluate(Point::Zero(3)), ContractViolation);
}

TEST_CASE("eval limit and early stop") {
  Objective obj = make_benchmark("ackley", 2);
  obj.set_eval_limit(2);
  obj.evaluate(pt({1.0, 1.0}));
  CHECK(obj.remaining() == 1);
  obj.evaluate(pt({1.0, 2.0}));
  CHECK(obj.exhausted());
  CHECK_THROWS_AS(obj.evaluate(pt({1.0, 1.0})), BudgetExhausted);

  Objective hit = make_benchmark("ackley", 2);
  hit.evaluate(Point::Zero(2));
  CHECK(hit.target_reached());
  CHECK(hit.exhausted());

  Objective mich = make_benchmark("michalewicz", 2);
  mich.evaluate(pt({2.2, 1.57}));
  CHECK_FALSE(mich.exhausted());
}

TEST_CASE("observer sees every call") {
  Objective obj = make_benchmark("michalewicz", 3);
  std::vector<std::size_t> seen;
  obj.set_observer([&](const Sample& s) { seen.push_back(s.index); });
  for (int i = 0; i < 4; ++i) obj.evaluate(Point::Constant(3, 0.3 * i));
  CHECK(seen == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("ackley values") {
  for (std::size_t d : {1u, 2u, 7u, 50u}) CHECK(std::abs(ackley(Point::Zero(static_cast<Eigen::Index>(d)))) < 1e-14);
  const double v = ackley(pt({1.0, 1.0}));
  CHECK(v == doctest::Approx(oracle::ackley({1.0, 1.0})).epsilon(1e-13));
  // high-precision evaluation of the same formula
  const long double s = -20.0L * std::exp(-0.2L) - std::exp(std::cos(2.0L * std::numbers::pi_v<long double>)) + 20.0L +
                        std::numbers::e_v<long double>;
  CHECK(std::abs(v - static_cast<double>(s)) < 1e-13);
  CHECK(ackley(pt({-1.0, -1.0})) == v);

  Rng rng(3);
  const DomainBox b = DomainBox::cube(6, -5.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const Point x = sample_uniform(b, rng);
    CHECK(ackley(x) == doctest::Approx(oracle::ackley(vec(x))).epsilon(1e-12));
  }
}

TEST_CASE("michalewicz values") {
  CHECK(michalewicz(Point::Zero(4)) == 0.0);
  CHECK(michalewicz(pt({2.2029, 1.5708})) == doctest::Approx(-1.8013).epsilon(1e-4));
  CHECK(oracle::michalewicz_minimum(2) == doctest::Approx(-1.8013).epsilon(1e-4));
  Rng rng(5);
  const DomainBox b = DomainBox::cube(5, 0.0, std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const Point x = sample_uniform(b, rng);
    const double y = michalewicz(x);
    CHECK(y <= 0.0);
    CHECK(y >= -5.0);
    CHECK(y == doctest::Approx(oracle::michalewicz(vec(x))).epsilon(1e-12));
  }
}

TEST_CASE("quantized tabular benchmark") {
  Objective obj = make_benchmark("quantized-tabular", 6);
  const double a = obj.evaluate(Point::Constant(6, 1.1)).y;
  const double b = obj.evaluate(Point::Constant(6, 1.0)).y;
  CHECK(a == b);
  REQUIRE(obj.known_optimum());
  CHECK(*obj.known_optimum() == tabular_minimum(6));
  CHECK(*obj.known_optimum() <= a);
  CHECK(tabular_cost(Point::Constant(3, 4.6)) == tabular_cost(Point::Constant(3, 5.0)));
}

TEST_CASE("quantize_wrap snapping") {
  Objective inner("id", DomainBox::cube(2, 0.0, 1.0), [](const Point& x) { return x[0] + 10.0 * x[1]; });
  Objective q = quantize_wrap(inner, {2, 2});
  std::set<double> values;
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) values.insert(q.evaluate(sample_uniform(q.box(), rng)).y);
  CHECK(values.size() == 4);

  CHECK(q.evaluate(pt({0.1, 0.1})).y == q.evaluate(pt({0.4, 0.2})).y);
  CHECK_THROWS_AS(quantize_wrap(inner, {2}), ContractViolation);
  CHECK_THROWS_AS(quantize_wrap(inner, {1, 3}), ContractViolation);

  // wrapping twice equals wrapping once
  Objective base = make_benchmark("ackley", 3);
  Objective once = quantize_wrap(base, {4, 5, 7});
  Objective twice = quantize_wrap(once, {4, 5, 7});
  for (int i = 0; i < 1000; ++i) {
    const Point x = sample_uniform(base.box(), rng);
    CHECK(once.evaluate(x).y == twice.evaluate(x).y);
  }
}

TEST_CASE("registry") {
  CHECK_THROWS_AS(make_benchmark("rosenbrock", 2), ContractViolation);
  CHECK_THROWS_AS(make_benchmark("ackley", 0), ContractViolation);
  for (const auto& n : benchmark_names()) CHECK(make_benchmark(n, 3).dim() == 3);
}

TEST_CASE("uniform sampling") {
  const DomainBox b = DomainBox::cube(2, 0.0, 1.0);
  Rng rng(11);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < 10000; ++i) {
    const Point x = sample_uniform(b, rng);
    CHECK(b.contains(x));
    mean += x;
  }
  mean /= 10000.0;
  CHECK(mean[0] > 0.45);
  CHECK(mean[0] < 0.55);
  CHECK(mean[1] > 0.45);
  CHECK(mean[1] < 0.55);
  Rng r1(7), r2(7);
  CHECK(sample_uniform(b, r1) == sample_uniform(b, r2));
}

TEST_CASE("latin hypercube stratification") {
  Rng rng(2);
  const DomainBox unit1 = DomainBox::cube(1, 0.0, 1.0);
  auto pts = latin_hypercube(unit1, 4, rng);
  std::vector<double> v;
  for (const auto& p : pts) v.push_back(p[0]);
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(v[i] >= 0.25 * static_cast<double>(i));
    CHECK(v[i] < 0.25 * static_cast<double>(i + 1));
  }
  CHECK(latin_hypercube(unit1, 1, rng).size() == 1);

  const DomainBox b = DomainBox::cube(5, -5.0, 10.0);
  Rng a(9), c(9);
  const auto p1 = latin_hypercube(b, 37, a);
  const auto p2 = latin_hypercube(b, 37, c);
  for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == p2[i]);
  for (std::size_t k = 0; k < 5; ++k) {
    std::set<long> strata;
    for (const auto& p : p1) strata.insert(static_cast<long>(std::floor((p[static_cast<Eigen::Index>(k)] + 5.0) / 15.0 * 37.0)));
    CHECK(strata.size() == 37);
  }
}

TEST_CASE("random unit vectors") {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) CHECK(random_unit_vector(7, rng).norm() == doctest::Approx(1.0).epsilon(1e-12));
}
