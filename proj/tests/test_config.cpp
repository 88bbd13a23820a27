#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "slugbot/config.hpp"

using namespace slugbot;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigDir = std::filesystem::path(SLUGBOT_SOURCE_DIR) / "config";

std::string error_path(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST(Config, JsonRoundTripIsLossless) {
  auto c = SimConfig::default_swallow();
  c.scenario.seed = 123456789012345ull;
  c.plant.ring_weights[4] = {0.1, 0.2, 0.3, 0.15, 0.05};
  c.mechanics.ring_direction[2] = -1.0;
  c.analysis.align_peak_retraction = true;
  c.scenario.schedule.push_back({12.5, stimulus_for(neural::BehaviorMode::Reject)});
  const json j = config_to_json(c);
  const auto back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.scenario.seed, c.scenario.seed);
  EXPECT_EQ(back.plant.ring_weights, c.plant.ring_weights);
  EXPECT_EQ(back.scenario.schedule, c.scenario.schedule);
}

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(config_to_json(c), config_to_json(SimConfig{}));
}

TEST(Config, ErrorsReportFieldPaths) {
  EXPECT_EQ(error_path({{"neural", {{"ru2_delay_ms", "soon"}}}}), "neural.ru2_delay_ms");
  EXPECT_EQ(error_path({{"plant", {{"bogus", 1}}}}), "plant.bogus");
  EXPECT_EQ(error_path({{"colour", "red"}}), "colour");
  EXPECT_EQ(error_path({{"plant", {{"ring_weights", {{1, 0, 0, 0, 0}}}}}}), "plant.ring_weights");
  EXPECT_EQ(error_path({{"mechanics", {{"sensors", {{"tof_noise_mm", -1.0}}}}}}), "mechanics.sensors.tof_noise_mm");
  EXPECT_EQ(error_path({{"scenario", {{"schedule", {{{"t_s", 1.0}, {"mode", "dance"}}}}}}}),
            "scenario.schedule[0].mode");
  EXPECT_EQ(error_path({{"neural", {{"ru3_delay_ms", 10.0}}}}), "neural.ru3_delay_ms");
  EXPECT_EQ(error_path({{"analysis", {{"cycles", 0}}}}), "analysis.cycles");
}

TEST(Config, RingWeightErrorsNameTheEntry) {
  auto j = config_to_json(SimConfig{});
  j["plant"]["ring_weights"][2][1] = 1.5;
  EXPECT_EQ(error_path(j), "plant.ring_weights[2][1]");
  j = config_to_json(SimConfig{});
  j["plant"]["ring_weights"][3] = {0.5, 0.5, 0.5, 0.0, 0.0};
  EXPECT_EQ(error_path(j), "plant.ring_weights[3]");
}

TEST(Config, ScheduleAcceptsModeShorthand) {
  const auto c = config_from_json({{"scenario", {{"schedule", {{{"t_s", 0.0}, {"mode", "bite"}}}}}}});
  ASSERT_EQ(c.scenario.schedule.size(), 1u);
  EXPECT_EQ(neural::classify_behavior(c.scenario.schedule[0].stimulus), neural::BehaviorMode::Bite);
}

TEST(Config, BehaviorMapIsConfigurable) {
  json j = config_to_json(SimConfig{});
  j["neural"]["behavior_map"] = json::array({{{"mode", "reject"}, {"arousal", true}}});
  const auto c = config_from_json(j);
  EXPECT_EQ(neural::classify_behavior(stimulus_for(neural::BehaviorMode::Swallow), c.behavior_map),
            neural::BehaviorMode::Reject);
}

TEST(Config, StimulusForClassifiesBack) {
  for (auto m : {neural::BehaviorMode::Quiescent, neural::BehaviorMode::Bite, neural::BehaviorMode::Swallow,
                 neural::BehaviorMode::Reject}) {
    EXPECT_EQ(neural::classify_behavior(stimulus_for(m)), m);
  }
}

TEST(Config, WithoutNoiseZeroesEverySigma) {
  const auto c = SimConfig::default_swallow().without_noise();
  EXPECT_EQ(c.plant.sensor_noise_psig, 0.0);
  EXPECT_EQ(c.mechanics.sensors.tof_noise_mm, 0.0);
  EXPECT_EQ(c.mechanics.sensors.imu_noise_deg, 0.0);
  EXPECT_EQ(c.mechanics.sensors.force_noise, 0.0);
}

TEST(Config, TickCount) {
  auto c = SimConfig::default_swallow();
  EXPECT_EQ(c.tick_count(), 60000u);
  c.scenario.dt_ms = 2.0;
  c.scenario.duration_s = 1.0;
  EXPECT_EQ(c.tick_count(), 500u);
}

TEST(Config, ShippedDefaultSwallowMatchesBuiltInDefaults) {
  const auto shipped = load_config(kConfigDir / "default_swallow.json");
  EXPECT_EQ(config_to_json(shipped), config_to_json(SimConfig::default_swallow()));
}

TEST(Config, ShippedBehaviorConfigsLoad) {
  const std::pair<const char*, neural::BehaviorMode> files[] = {
      {"bite.json", neural::BehaviorMode::Bite},
      {"reject.json", neural::BehaviorMode::Reject},
      {"quiescent.json", neural::BehaviorMode::Quiescent}};
  for (const auto& [name, mode] : files) {
    const auto c = load_config(kConfigDir / name);
    ASSERT_FALSE(c.scenario.schedule.empty()) << name;
    EXPECT_EQ(neural::classify_behavior(c.scenario.schedule.front().stimulus, c.behavior_map), mode) << name;
  }
}

TEST(Config, LoadReportsMissingFileAndBadJson) {
  EXPECT_ANY_THROW(load_config(kConfigDir / "does_not_exist.json"));
  const auto tmp = std::filesystem::temp_directory_path() / "slugbot_bad_config.json";
  std::ofstream(tmp) << "{ not json";
  EXPECT_ANY_THROW(load_config(tmp));
  std::filesystem::remove(tmp);
}
