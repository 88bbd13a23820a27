#include "slugbot/simulation.hpp"

#include "slugbot/motor_frame.hpp"

namespace slugbot {

namespace {
constexpr std::uint64_t kSensorStream = 0x73656E736F72ull;
}

Simulation::Simulation(SimConfig config)
    : config_(std::move(config)),
      plant_(config_.plant, config_.scenario.seed),
      sensor_noise_(config_.scenario.seed, kSensorStream) {
  config_.validate();
  reset();
}

void Simulation::reset() {
  neural_ = neural::NeuralState{};
  plant_.reset(config_.scenario.seed);
  grasper_ = mech::GrasperState{};
  food_ = mech::FoodObject{};
  food_.externally_held = config_.scenario.externally_held;
  sensor_noise_.reseed(config_.scenario.seed, kSensorStream);
  stimulus_ = {};
  tick_ = 0;
  sequence_gaps_ = 0;
  last_sequence_ = -1;
}

TraceRecord Simulation::step() {
  const double dt = config_.scenario.dt_ms;
  const double t = neural_.now_ms;

  const auto readings = mech::sense(grasper_, config_.mechanics, sensor_noise_);
  auto result = neural::step_neural(std::move(neural_), stimulus_, readings.proprio(), dt,
                                    config_.neural, config_.behavior_map);
  neural_ = std::move(result.state);

  const auto bytes = wire::encode_motor_frame(result.frame);
  const auto received = wire::decode_motor_frame(bytes, t);
  if (last_sequence_ >= 0 && received.sequence != static_cast<std::uint8_t>(last_sequence_ + 1)) {
    ++sequence_gaps_;
  }
  last_sequence_ = received.sequence;

  plant_.step(received, dt);
  const auto mech_step =
      mech::step_mechanics(grasper_, plant_.channels(), plant_.params(), food_, config_.mechanics, dt);
  grasper_ = mech_step.grasper;
  food_ = mech_step.food;
  ++tick_;

  TraceRecord r;
  r.t_ms = t;
  r.stimulus = stimulus_;
  r.mode = neural_.mode;
  r.phase = neural_.phase;
  r.units = neural_.units;
  r.channels = plant_.channels();
  r.grasper = grasper_;
  r.food = food_;
  r.sensors = readings;
  return r;
}

TraceRecord ScenarioRunner::step() {
  const auto& schedule = sim_.config().scenario.schedule;
  const double t_s = sim_.now_ms() * 1e-3;
  while (next_event_ < schedule.size() && schedule[next_event_].t_s <= t_s + 1e-12) {
    sim_.set_stimulus(schedule[next_event_].stimulus);
    ++next_event_;
  }
  return sim_.step();
}

void ScenarioRunner::reset() {
  sim_.reset();
  next_event_ = 0;
}

Trace run_scenario(const SimConfig& config) {
  ScenarioRunner runner(config);
  const std::size_t n = config.tick_count();
  Trace trace;
  trace.reserve(n);
  for (std::size_t k = 0; k < n; ++k) trace.push_back(runner.step());
  return trace;
}

}  // namespace slugbot
