#include <benchmark/benchmark.h>

#include <vector>

#include "stochlyap/linear_solver.hpp"
#include "stochlyap/lyapunov.hpp"
#include "stochlyap/parallel.hpp"
#include "stochlyap/product.hpp"
#include "stochlyap/random.hpp"

using namespace stochlyap;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

StochasticMatrix dense_random(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.bernoulli(0.3) ? rng.uniform(0.05, 1.0) : 0.0;
    a(i, i) += 1.0;
    a.row(i) /= a.row(i).sum();
  }
  return validate(a);
}

void BM_Tau(benchmark::State& state) {
  const auto a = dense_random(static_cast<std::size_t>(state.range(1)), 1);
  const bool serial = exec_of(state) == Execution::Serial;
  for (auto _ : state) benchmark::DoNotOptimize(serial ? tau(a) : tau_parallel(a));
}
BENCHMARK(BM_Tau)->ArgsProduct({{0, 1}, {64, 256}});

void BM_ProductEnsemble(benchmark::State& state) {
  const FiniteMatrixSet set({dense_random(8, 2), dense_random(8, 3), dense_random(8, 4)});
  const auto model = SequenceModel::iid({0.3, 0.3, 0.4});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        simulate_ensemble(set, model, 2000, power_of_two_checkpoints(2000), 32, 9, exec_of(state)));
}
BENCHMARK(BM_ProductEnsemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MonteCarloDecay(benchmark::State& state) {
  const std::vector<Matrix> modes{(Matrix(2, 2) << 0.2, 0, 0, 1).finished(), (Matrix(2, 2) << 1, 0, 0, 0.8).finished(),
                                  (Matrix(2, 2) << 1, 0, 0, 0.6).finished()};
  const Matrix pi = (Matrix(3, 3) << 0, 0.4, 0.6, 1, 0, 0, 1, 0, 0).finished();
  const SwitchedSystem sys(modes, SequenceModel::markov({1.0 / 3, 1.0 / 3, 1.0 / 3}, pi));
  const auto v = inf_norm_lyapunov();
  const Vector x0 = Vector::Ones(2);
  for (auto _ : state) benchmark::DoNotOptimize(monte_carlo_decay(sys, v, x0, 200, 256, 11, 1e-8, exec_of(state)));
}
BENCHMARK(BM_MonteCarloDecay)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolverStep(benchmark::State& state) {
  Rng rng(5);
  const std::size_t n = 16, m = 48;
  Vector x(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1, 1);
  std::vector<EquationBlock> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix a(5, static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = rng.uniform(-1, 1);
    blocks.push_back({a, a * x});
  }
  const PartitionedLinearSystem sys(blocks);
  const auto proj = projections_of(sys);
  DirectedGraph g(n);
  for (std::size_t i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  g.add_self_loops();
  auto st = initial_state(sys);
  for (auto _ : state) {
    st = step(st, g, proj, exec_of(state));
    benchmark::DoNotOptimize(st.estimates.front().data());
  }
}
BENCHMARK(BM_SolverStep)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
