// Copyright (c) apriori contributors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "apriori/certificate.hpp"
#include "apriori/pmp.hpp"
#include "apriori/reparam.hpp"
#include "apriori/solver.hpp"

namespace {

using namespace apriori;

const char* problem_name(int i) { return builtin_names().at(static_cast<std::size_t>(i)).c_str(); }

void BM_CostAndGradient(benchmark::State& state) {
  const auto p = builtin("lq-tv");
  const Matrix u = Matrix::Constant(1, state.range(0) + 1, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(cost_and_gradient(p, u).cost);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CostAndGradient)->RangeMultiplier(2)->Range(250, 4000)->Complexity(benchmark::oN);

void BM_Solve(benchmark::State& state) {
  const auto p = builtin("lq-tracking");
  SolverOptions opts;
  opts.intervals = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, opts).cost);
}
BENCHMARK(BM_Solve)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Certify(benchmark::State& state) {
  const auto p = builtin(problem_name(static_cast<int>(state.range(0))));
  state.SetLabel(p.name);
  for (auto _ : state) benchmark::DoNotOptimize(certify(p).ell);
}
BENCHMARK(BM_Certify)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_Adjoint(benchmark::State& state) {
  const auto p = builtin("lq-tv");
  const Certificate cert = certify(p);
  const ControlSolution sol = solve(p);
  const auto traj = to_time_optimal(p, sol, cert.beta, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const AdjointPath adj = integrate_adjoint(p, cert, traj);
    benchmark::DoNotOptimize(residual_report(p, cert, traj, adj).T_hat);
  }
}
BENCHMARK(BM_Adjoint)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
