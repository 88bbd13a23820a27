#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slugbot/analysis.hpp"
#include "slugbot/golden.hpp"
#include "slugbot/simulation.hpp"

using namespace slugbot;
using nlohmann::json;

namespace {

const std::filesystem::path kSourceDir(SLUGBOT_SOURCE_DIR);

std::string csv_of(const Trace& t) {
  std::ostringstream out;
  write_trace_csv(out, t);
  return out.str();
}

// Structural comparison with an absolute tolerance on numbers.
void expect_json_near(const json& got, const json& want, const std::string& path, double tol) {
  if (want.is_number() && got.is_number()) {
    EXPECT_NEAR(got.get<double>(), want.get<double>(), tol) << path;
    return;
  }
  ASSERT_EQ(got.type(), want.type()) << path;
  if (want.is_object()) {
    ASSERT_EQ(got.size(), want.size()) << path;
    for (auto it = want.begin(); it != want.end(); ++it) {
      ASSERT_TRUE(got.contains(it.key())) << path << '.' << it.key();
      expect_json_near(got.at(it.key()), it.value(), path + "." + it.key(), tol);
    }
  } else if (want.is_array()) {
    ASSERT_EQ(got.size(), want.size()) << path;
    for (std::size_t i = 0; i < want.size(); ++i) {
      expect_json_near(got[i], want[i], path + "[" + std::to_string(i) + "]", tol);
    }
  } else {
    EXPECT_EQ(got, want) << path;
  }
}

}  // namespace

TEST(Simulation, QuiescentRunNeverProtracts) {
  auto c = SimConfig::default_swallow();
  c.scenario.schedule = {{0.0, stimulus_for(neural::BehaviorMode::Quiescent)}};
  c.scenario.duration_s = 10.0;
  const auto trace = run_scenario(c);
  ASSERT_EQ(trace.size(), 10000u);
  for (const auto& r : trace) {
    ASSERT_FALSE(r.units[neural::index(neural::Unit::B31_B32)]);
    ASSERT_EQ(r.phase, neural::Phase::Idle);
  }
}

TEST(Simulation, SameSeedGivesByteIdenticalTraces) {
  auto c = SimConfig::default_swallow();
  c.scenario.duration_s = 10.0;
  EXPECT_EQ(csv_of(run_scenario(c)), csv_of(run_scenario(c)));
}

TEST(Simulation, DifferentSeedChangesSensors) {
  auto a = SimConfig::default_swallow();
  a.scenario.duration_s = 1.0;
  auto b = a;
  b.scenario.seed = 2;
  EXPECT_NE(csv_of(run_scenario(a)), csv_of(run_scenario(b)));
}

TEST(Simulation, ResetReproducesTheRun) {
  auto c = SimConfig::default_swallow();
  Simulation sim(c);
  sim.set_stimulus(stimulus_for(neural::BehaviorMode::Swallow));
  Trace first;
  for (int i = 0; i < 2000; ++i) first.push_back(sim.step());
  sim.reset();
  sim.set_stimulus(stimulus_for(neural::BehaviorMode::Swallow));
  for (int i = 0; i < 2000; ++i) ASSERT_EQ(sim.step(), first[static_cast<std::size_t>(i)]) << i;
  EXPECT_EQ(sim.sequence_gaps(), 0u);
}

TEST(Simulation, TimestampsAdvanceByDt) {
  auto c = SimConfig::default_swallow();
  c.scenario.duration_s = 0.5;
  const auto trace = run_scenario(c);
  for (std::size_t i = 0; i < trace.size(); ++i) ASSERT_EQ(trace[i].t_ms, static_cast<double>(i));
}

TEST(ScenarioRunner, AppliesScheduleEntriesAtTheirTicks) {
  auto c = SimConfig::default_swallow();
  c.scenario.duration_s = 3.0;
  c.scenario.schedule = {{0.5, stimulus_for(neural::BehaviorMode::Bite)},
                         {2.0, stimulus_for(neural::BehaviorMode::Quiescent)}};
  const auto trace = run_scenario(c);
  EXPECT_EQ(trace[499].mode, neural::BehaviorMode::Quiescent);
  EXPECT_EQ(trace[500].mode, neural::BehaviorMode::Bite);
  EXPECT_EQ(trace[1999].mode, neural::BehaviorMode::Bite);
  EXPECT_EQ(trace[2000].mode, neural::BehaviorMode::Quiescent);
  EXPECT_EQ(trace[2000].phase, neural::Phase::Idle);
}

TEST(ScenarioRunner, FinishesAfterConfiguredTicks) {
  auto c = SimConfig::default_swallow();
  c.scenario.duration_s = 0.25;
  ScenarioRunner r(c);
  int n = 0;
  while (!r.finished()) {
    r.step();
    ++n;
  }
  EXPECT_EQ(n, 250);
}

TEST(Simulation, DefaultSwallowCyclesAndIngests) {
  const auto trace = run_scenario(SimConfig::default_swallow());
  const auto cycles = analysis::segment_cycles(trace);
  EXPECT_GE(cycles.size(), 8u);
  const auto ingested = column_values(trace, "ingested_mm");
  for (double v : mech::net_transport(ingested, cycles)) EXPECT_GT(v, 0.0);
}

TEST(Golden, DefaultSwallowMatchesPinnedValues) {
  const auto golden_path = kSourceDir / "tests" / "golden" / "default_swallow.json";
  std::ifstream in(golden_path);
  ASSERT_TRUE(in) << "missing " << golden_path << "; run `slugbot golden regen`";
  const json want = json::parse(in);
  const json got = compute_golden(load_config(kSourceDir / "config" / "default_swallow.json"));
  expect_json_near(got, want, "golden", 1e-6);
  EXPECT_GE(got.at("noisy").at("total_cycles").get<int>(), 8);
}
