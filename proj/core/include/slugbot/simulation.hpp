#pragma once

#include <cstdint>

#include "slugbot/config.hpp"
#include "slugbot/mechanics.hpp"
#include "slugbot/neural.hpp"
#include "slugbot/noise.hpp"
#include "slugbot/plant.hpp"
#include "slugbot/trace.hpp"

namespace slugbot {

/// Closed-loop stepper. Each tick: sense, step the controller, ship the motor
/// frame through the wire codec, step the pressure plant, step the mechanics.
class Simulation {
 public:
  explicit Simulation(SimConfig config);

  /// Back to the initial state of the configured scenario.
  void reset();

  void set_stimulus(const neural::StimulusState& s) { stimulus_ = s; }
  const neural::StimulusState& stimulus() const { return stimulus_; }

  TraceRecord step();

  std::uint64_t tick() const { return tick_; }
  double now_ms() const { return neural_.now_ms; }
  const SimConfig& config() const { return config_; }
  const neural::NeuralState& neural_state() const { return neural_; }
  const plant::PressurePlant& plant() const { return plant_; }
  const mech::GrasperState& grasper() const { return grasper_; }
  const mech::FoodObject& food() const { return food_; }
  std::uint64_t setpoint_clamp_warnings() const { return plant_.clamp_warnings(); }
  std::uint64_t sequence_gaps() const { return sequence_gaps_; }

 private:
  SimConfig config_;
  neural::NeuralState neural_;
  plant::PressurePlant plant_;
  mech::GrasperState grasper_;
  mech::FoodObject food_;
  NoiseSource sensor_noise_;
  neural::StimulusState stimulus_;
  std::uint64_t tick_ = 0;
  std::uint64_t sequence_gaps_ = 0;
  int last_sequence_ = -1;
};

/// Simulation plus the scenario's stimulus schedule. Each schedule entry is
/// applied at the first tick whose start time reaches it; stimuli set in
/// between (e.g. by a live client) hold until the next entry.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(SimConfig config) : sim_(std::move(config)) {}

  TraceRecord step();
  void reset();
  bool finished() const { return sim_.tick() >= sim_.config().tick_count(); }

  Simulation& sim() { return sim_; }
  const Simulation& sim() const { return sim_; }

 private:
  Simulation sim_;
  std::size_t next_event_ = 0;
};

/// Runs the configured scenario for its full duration.
Trace run_scenario(const SimConfig& config);

}  // namespace slugbot
