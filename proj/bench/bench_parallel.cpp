// Serial reference path against the OpenMP path for the two parallel kernels:
// independent runs of a sweep and batched prox solves.
#include <benchmark/benchmark.h>

#include "shb/harness.hpp"
#include "shb/stationarity.hpp"

using namespace shb;

namespace {

Execution exec_of(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_Sweep(benchmark::State& state) {
  ExperimentConfig c;
  c.problem.phase = {20, 60, 10.0, 0.2, 5.0, XStarMode::UnitSphere};
  c.methods = {MethodSpec::parse("shb:sqrtK:1"), MethodSpec::parse("sgd")};
  c.alpha0_grid = {0.003, 0.01, 0.03};
  c.epochs = 50;
  c.seeds = 8;
  c.epsilons = {1e-1, 1e-2};
  const auto problem = make_problem(c.problem);
  for (auto _ : state) benchmark::DoNotOptimize(run_experiment(c, *problem, exec_of(state)));
  state.counters["workers"] = worker_count();
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ProxBatch(benchmark::State& state) {
  const auto p = generate_phase_retrieval({20, 60, 10.0, 0.2, 5.0, XStarMode::UnitSphere}, 3);
  Rng rng = make_rng(1, 1);
  std::normal_distribution<double> nd;
  std::vector<Vector> pts(32, Vector(20));
  for (auto& v : pts)
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = nd(rng);
  const auto cfg = MoreauConfig::standard(p->analytic_rho(), 2000, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(prox_solve_batch(*p, pts, cfg, exec_of(state)));
  state.counters["workers"] = worker_count();
}
BENCHMARK(BM_ProxBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
