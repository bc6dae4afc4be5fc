#include <benchmark/benchmark.h>

#include <vector>

#include "dptune/cmaes.hpp"
#include "dptune/objective.hpp"
#include "dptune/scenario.hpp"

using namespace dptune;

namespace {

GainParams gains() {
  GainParams g;
  g.a = {0.5, 0, 0.5, 0, 0, 0.5, 1, 0, 1, 0, 0, 1};
  return g;
}

FilterParams filter() { return {Vec3::Constant(0.1), Vec3::Constant(0.8)}; }

void BM_ShipStep(benchmark::State& state) {
  const ShipModel model(ShipParams::defaults());
  ShipState s;
  s.velocity = {0.2, 0.1, 0.05};
  s.actuators = {model.params().hover_port, model.params().hover_starboard, 10.0};
  const ActuatorState cmd{s.actuators.port + 0.01, s.actuators.starboard - 0.01, 20.0};
  for (auto _ : state) {
    ShipState n = step(s, cmd, {1.0, 0.5}, 0.1, model);
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_ShipStep);

void BM_ControlLaw(benchmark::State& state) {
  const ShipModel model(ShipParams::defaults());
  const GainMatrices g = build_gains(gains());
  ShipState s;
  s.pose = {0.5, -0.3, 0.2};
  s.velocity = {0.2, 0.1, 0.05};
  ReferenceSignal ref;
  for (auto _ : state) {
    benchmark::DoNotOptimize(control_law(s, ref, g, Vec3(0.1, 0.2, 0.01), model));
  }
}
BENCHMARK(BM_ControlLaw);

void BM_FilterStep(benchmark::State& state) {
  const auto substeps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    // From rest each time: a long-settled state decays into subnormals.
    FilterState f = filter_step(FilterState{}, {4.0, 0.0, 0.5}, 0.1, filter(), substeps);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_FilterStep)->Arg(1)->Arg(20);

void BM_TrainingEpisode(benchmark::State& state) {
  const ShipModel model(ShipParams::defaults());
  TrainingSelection sel;
  sel.episodes = {11};
  sel.wind_directions = {0.5};
  const ScenarioSpec s = training_scenarios(sel).front();
  const PenaltyConfig pen = PenaltyConfig::for_case(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_episode(gains(), filter(), s, model, pen).breakdown.total());
  }
}
BENCHMARK(BM_TrainingEpisode)->Unit(benchmark::kMillisecond);

void BM_SmokeObjective(benchmark::State& state) {
  const ShipModel model(ShipParams::defaults());
  TrainingSelection sel;
  sel.episodes = {1, 2, 3};
  sel.wind_directions = {0.0, 0.785398};
  const std::vector<ScenarioSpec> scenarios = training_scenarios(sel);
  const Eigen::VectorXd x = DecisionVector::encode(gains(), filter());
  const PenaltyConfig pen = PenaltyConfig::for_case(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        objective(std::span<const double>(x.data(), DecisionVector::kSize), scenarios, model, pen));
  }
}
BENCHMARK(BM_SmokeObjective)->Unit(benchmark::kMillisecond);

void BM_CmaGeneration(benchmark::State& state) {
  const BoxBounds box{DecisionVector::lower(), DecisionVector::upper()};
  CmaState cma = initialize(box, {});
  for (auto _ : state) {
    const CandidateBatch batch = ask(cma);
    std::vector<double> values;
    values.reserve(batch.candidates.size());
    for (const auto& x : batch.candidates) values.push_back(x.squaredNorm());
    tell(cma, batch, values);
  }
}
BENCHMARK(BM_CmaGeneration);

}  // namespace
BENCHMARK_MAIN();
