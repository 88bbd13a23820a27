#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slugbot/mechanics.hpp"
#include "slugbot/neural.hpp"
#include "slugbot/plant.hpp"

namespace slugbot {

/// Validation failure carrying the dotted path of the offending field,
/// e.g. "plant.ring_weights[2][1]".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct StimulusEvent {
  double t_s = 0.0;
  neural::StimulusState stimulus;

  friend bool operator==(const StimulusEvent&, const StimulusEvent&) = default;
};

struct ScenarioConfig {
  double duration_s = 60.0;
  double dt_ms = 1.0;
  std::uint64_t seed = 1;
  bool externally_held = true;
  /// Stimulus changes, sorted by time. The state before the first entry is all-false.
  std::vector<StimulusEvent> schedule;
};

struct AnalysisConfig {
  int warmup_cycles = 1;
  int cycles = 8;
  bool align_peak_retraction = false;
  double align_phase_pct = 0.0;
  double rotation_target_deg = 90.0;
  double rotation_tolerance_deg = 10.0;
  double jitter_bound_pct = 13.3;
};

struct SimConfig {
  neural::DelayParams neural;
  neural::BehaviorMap behavior_map = neural::BehaviorMap::standard();
  plant::PlantParams plant = plant::PlantParams::defaults();
  mech::MechParams mechanics;
  ScenarioConfig scenario;
  AnalysisConfig analysis;

  /// Swallowing stimuli from t = 0, all other settings at their defaults.
  static SimConfig default_swallow();

  /// Copy with every sensor noise sigma set to zero.
  SimConfig without_noise() const;

  /// Throws ConfigError.
  void validate() const;

  std::size_t tick_count() const;
};

/// Stimulus combination that classifies to the given mode under the standard map.
neural::StimulusState stimulus_for(neural::BehaviorMode mode);

/// Missing fields keep their defaults; unknown fields are rejected.
SimConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimConfig& c);

SimConfig load_config(const std::filesystem::path& path);

}  // namespace slugbot
