#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "slugbot/neural.hpp"

namespace slugbot::oracle {

/// Piecewise-constant input: each entry holds from its tick until the next entry.
struct StimulusChange {
  std::int64_t tick = 0;
  neural::StimulusState stimulus;
};

struct ProprioChange {
  std::int64_t tick = 0;
  double x_hat = 0.0;
};

struct OracleInput {
  std::int64_t ticks = 0;
  std::vector<StimulusChange> stimulus;  // first entry at tick 0
  std::vector<ProprioChange> proprio;    // first entry at tick 0
};

enum class EventKind : std::uint8_t { ModeChange, EnterIdle, EnterProtraction, EnterRetraction, B10Fires, RU2Fires, RU3Fires };

struct OracleEvent {
  std::int64_t tick = 0;
  EventKind kind = EventKind::ModeChange;
  neural::BehaviorMode mode = neural::BehaviorMode::Quiescent;  // ModeChange only
};

/// Sorted phase-transition and delayed-fire events for the input, computed
/// from the input's change points and the controller's thresholds and delays.
/// Works in whole ticks at dt = 1 ms.
std::vector<OracleEvent> oracle_events(const OracleInput& in, const neural::DelayParams& p);

struct OracleTick {
  neural::UnitArray units{};
  neural::Phase phase = neural::Phase::Idle;
  neural::BehaviorMode mode = neural::BehaviorMode::Quiescent;
};

/// Expands the event list into per-tick unit values for comparison.
std::vector<OracleTick> render_events(const std::vector<OracleEvent>& events, std::int64_t ticks);

/// Random stimulus and proprioception schedule of the given length.
OracleInput random_input(std::mt19937_64& rng, std::int64_t ticks);

/// Runs step_neural tick by tick over the same input.
std::vector<OracleTick> run_stepper(const OracleInput& in, const neural::DelayParams& p);

}  // namespace slugbot::oracle
