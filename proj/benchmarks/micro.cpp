#include <benchmark/benchmark.h>

#include "evolvegen/checker/checker.hpp"
#include "evolvegen/compile/schedule.hpp"
#include "evolvegen/evolve/evolve.hpp"
#include "evolvegen/miter/miter.hpp"
#include "evolvegen/netlist/bitblast.hpp"
#include "evolvegen/predictor/predictor.hpp"
#include "evolvegen/sat/dimacs.hpp"
#include "evolvegen/sat/solver.hpp"
#include "support/aig_oracle.hpp"
#include "support/cnf_oracle.hpp"

namespace {

using namespace evolvegen;

graph::ComputationGraph sample_graph(unsigned length) {
  Rng rng(42);
  return graph::generate_fresh(rng, length);
}

// Random features with a label driven by two of them.
predictor::GbrtModel synthetic_model() {
  Rng rng(7);
  std::vector<predictor::LabeledExample> data(400);
  for (auto& ex : data) {
    for (double& v : ex.features.values) v = rng.uniform_real() * 100;
    ex.label = 0.02 * ex.features.values[0] + 0.01 * ex.features.values[12];
  }
  return predictor::train(data, {});
}

void BM_SatRandom3Cnf(benchmark::State& state) {
  Rng rng(1);
  std::vector<sat::Cnf> cnfs;
  for (int i = 0; i < 64; ++i) cnfs.push_back(testing::random_3cnf(rng, 20));
  std::size_t i = 0;
  for (auto _ : state) {
    sat::Solver s;
    sat::load(s, cnfs[i++ % cnfs.size()]);
    benchmark::DoNotOptimize(s.solve({}));
  }
}
BENCHMARK(BM_SatRandom3Cnf);

void BM_PdrRandomAig(benchmark::State& state) {
  Rng rng(2);
  std::vector<netlist::AigCircuit> aigs;
  for (int i = 0; i < 64; ++i) aigs.push_back(testing::random_aig(rng, 3, 12, 60));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(checker::pdr(aigs[i++ % aigs.size()], {}).verdict);
}
BENCHMARK(BM_PdrRandomAig);

void BM_ScheduleOptimized(benchmark::State& state) {
  const graph::ComputationGraph g = sample_graph(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compile::schedule(g, {compile::ScheduleKind::kOptimized}));
}
BENCHMARK(BM_ScheduleOptimized)->Arg(4)->Arg(16);

void BM_BitblastMiter(benchmark::State& state) {
  const graph::ComputationGraph g = sample_graph(static_cast<unsigned>(state.range(0)));
  const ts::TransitionSystem m = miter::build_miter(compile::schedule(g, {compile::ScheduleKind::kBasic}),
                                                    compile::schedule(g, {compile::ScheduleKind::kOptimized}));
  for (auto _ : state) benchmark::DoNotOptimize(netlist::bitblast_property(m).num_ands());
}
BENCHMARK(BM_BitblastMiter)->Arg(4)->Arg(16);

void BM_GbrtPredict(benchmark::State& state) {
  const predictor::GbrtModel model = synthetic_model();
  predictor::FeatureVector fv;
  fv.values.fill(50);
  for (auto _ : state) benchmark::DoNotOptimize(predictor::predict(model, fv));
}
BENCHMARK(BM_GbrtPredict);

void BM_PipelineEvaluate(benchmark::State& state) {
  evolve::PipelineEvaluator ev(synthetic_model(), {});
  const graph::ComputationGraph g = sample_graph(static_cast<unsigned>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(g).reward);
}
BENCHMARK(BM_PipelineEvaluate)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
