#include <benchmark/benchmark.h>

#include <cmath>

#include "mctd/benchmarks.hpp"
#include "mctd/gp.hpp"
#include "mctd/kernels.hpp"
#include "mctd/sampling.hpp"

using namespace mctd;

namespace {

Eigen::MatrixXd random_rows(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = u(rng);
  return m;
}

template <bool Parallel>
void BM_cross(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd a = random_rows(n, 20, 1), b = random_rows(200, 20, 2);
  const Eigen::VectorXd ls = Eigen::VectorXd::Constant(20, 0.5);
  for (auto _ : state) {
    Eigen::MatrixXd k = Parallel ? kernels::matern52_cross(a, b, ls, 1.0) : kernels::matern52_cross_serial(a, b, ls, 1.0);
    benchmark::DoNotOptimize(k.data());
  }
  state.SetItemsProcessed(state.iterations() * n * 200);
}

template <bool Parallel>
void BM_gram(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  const Eigen::MatrixXd a = random_rows(n, 20, 3);
  const Eigen::VectorXd ls = Eigen::VectorXd::Constant(20, 0.5);
  for (auto _ : state) {
    Eigen::MatrixXd k = Parallel ? kernels::matern52_gram(a, ls, 1.0, 1e-6) : kernels::matern52_gram_serial(a, ls, 1.0, 1e-6);
    benchmark::DoNotOptimize(k.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <bool Parallel>
void BM_predict(benchmark::State& state) {
  Objective obj = make_benchmark("ackley", 20);
  Rng rng(4);
  std::vector<Sample> train;
  for (int i = 0; i < 200; ++i) train.push_back(obj.evaluate(sample_uniform(obj.box(), rng)));
  KernelParams p;
  p.lengthscales = Eigen::VectorXd::Constant(20, 0.5);
  const GpModel gp = GpModel::condition(train, obj.box(), p);
  std::vector<Point> xs;
  for (int64_t i = 0; i < state.range(0); ++i) xs.push_back(sample_uniform(obj.box(), rng));
  for (auto _ : state) {
    auto r = Parallel ? gp.predict_batch(xs) : gp.predict_batch_serial(xs);
    benchmark::DoNotOptimize(r.mean.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_cross<true>)->Name("matern52_cross/omp")->Arg(500)->Arg(2000);
BENCHMARK(BM_cross<false>)->Name("matern52_cross/serial")->Arg(500)->Arg(2000);
BENCHMARK(BM_gram<true>)->Name("matern52_gram/omp")->Arg(100)->Arg(400);
BENCHMARK(BM_gram<false>)->Name("matern52_gram/serial")->Arg(100)->Arg(400);
BENCHMARK(BM_predict<true>)->Name("predict_batch/omp")->Arg(500)->Arg(2000);
BENCHMARK(BM_predict<false>)->Name("predict_batch/serial")->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
