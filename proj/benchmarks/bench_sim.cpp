#include <benchmark/benchmark.h>

#include <sstream>

#include "slugbot/analysis.hpp"
#include "slugbot/motor_frame.hpp"
#include "slugbot/simulation.hpp"

using namespace slugbot;

static void BM_NeuralStep(benchmark::State& state) {
  const auto stim = stimulus_for(neural::BehaviorMode::Swallow);
  const neural::DelayParams p;
  const auto map = neural::BehaviorMap::standard();
  neural::NeuralState ns;
  double x = 0.0;
  for (auto _ : state) {
    x = x > 1.0 ? 0.0 : x + 0.002;
    auto r = neural::step_neural(std::move(ns), stim, {x, 0.0}, 1.0, p, map);
    ns = std::move(r.state);
    benchmark::DoNotOptimize(r.frame);
  }
}
BENCHMARK(BM_NeuralStep);

static void BM_WireRoundTrip(benchmark::State& state) {
  neural::MotorFrame f;
  f.commands.ru1 = f.commands.closer = true;
  for (auto _ : state) {
    ++f.sequence;
    auto back = wire::decode_motor_frame(wire::encode_motor_frame(f), 0.0);
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_WireRoundTrip);

static void BM_PlantStep(benchmark::State& state) {
  plant::PressurePlant pp(plant::PlantParams::defaults(), 1);
  neural::MotorFrame f;
  f.commands.i2_drive = f.commands.ru1 = f.commands.ru2 = f.commands.opener = true;
  for (auto _ : state) {
    pp.step(f, 1.0);
    benchmark::DoNotOptimize(pp.channels());
  }
}
BENCHMARK(BM_PlantStep);

static void BM_SimulationTick(benchmark::State& state) {
  Simulation sim(SimConfig::default_swallow());
  sim.set_stimulus(stimulus_for(neural::BehaviorMode::Swallow));
  for (auto _ : state) {
    auto r = sim.step();
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_SimulationTick);

static void BM_DefaultSwallow60s(benchmark::State& state) {
  const auto cfg = SimConfig::default_swallow();
  for (auto _ : state) {
    auto trace = run_scenario(cfg);
    benchmark::DoNotOptimize(trace.data());
  }
}
BENCHMARK(BM_DefaultSwallow60s)->Unit(benchmark::kMillisecond);

static void BM_Analyze60s(benchmark::State& state) {
  const auto cfg = SimConfig::default_swallow();
  const auto trace = run_scenario(cfg);
  for (auto _ : state) {
    auto report = analysis::analyze(trace, cfg.analysis);
    benchmark::DoNotOptimize(report);
  }
}
BENCHMARK(BM_Analyze60s)->Unit(benchmark::kMillisecond);

static void BM_WriteCsv60s(benchmark::State& state) {
  const auto trace = run_scenario(SimConfig::default_swallow());
  for (auto _ : state) {
    std::ostringstream out;
    write_trace_csv(out, trace);
    benchmark::DoNotOptimize(out.str().size());
  }
}
BENCHMARK(BM_WriteCsv60s)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
