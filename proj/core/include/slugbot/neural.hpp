#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace slugbot::neural {

/// Pushbutton-settable sensory and arousal inputs. Fields are independent.
struct StimulusState {
  bool mech_lips = false;
  bool chem_lips = false;
  bool mech_grasper = false;
  bool arousal = false;

  friend bool operator==(const StimulusState&, const StimulusState&) = default;
};

enum class BehaviorMode : std::uint8_t { Quiescent, Bite, Swallow, Reject };

enum class Phase : std::uint8_t { Idle, Protraction, Retraction };

/// Boolean units carried in NeuralState. Order is the trace column order.
enum class Unit : std::uint8_t {
  B31_B32,
  B64,
  CBI3,
  B38,
  B10,
  B43_B45,
  Opener,  // B44/B48
  Closer,
  RU1,
  RU2,
  RU3,
};
inline constexpr std::size_t kUnitCount = 11;
using UnitArray = std::array<bool, kUnitCount>;

constexpr std::size_t index(Unit u) { return static_cast<std::size_t>(u); }

std::string_view to_string(BehaviorMode m);
std::string_view to_string(Phase p);
std::string_view to_string(Unit u);
std::optional<BehaviorMode> parse_mode(std::string_view name);

bool is_ingestive(BehaviorMode m);

/// One clause of the stimulus-to-behavior table. Unset fields match anything.
struct BehaviorRule {
  BehaviorMode mode = BehaviorMode::Quiescent;
  std::optional<bool> mech_lips;
  std::optional<bool> chem_lips;
  std::optional<bool> mech_grasper;
  std::optional<bool> arousal;

  bool matches(const StimulusState& s) const;
};

/// Ordered rule table; the first matching rule wins, no match is Quiescent.
struct BehaviorMap {
  std::vector<BehaviorRule> rules;

  /// Swallow = arousal & chem & mech_lips & mech_grasper,
  /// Bite = arousal & chem & mech_lips & !mech_grasper,
  /// Reject = arousal & mech_grasper & !chem.
  static BehaviorMap standard();
};

BehaviorMode classify_behavior(const StimulusState& s);
BehaviorMode classify_behavior(const StimulusState& s, const BehaviorMap& map);

/// Proprioceptive input to the controller, derived from the simulated sensors.
struct ProprioFeedback {
  double x_hat = 0.0;  // normalized odontophore position, 0 = retracted
  double closure_force = 0.0;
};

struct DelayParams {
  double ru2_delay_ms = 300.0;
  double ru3_delay_ms = 1200.0;
  double b10_delay_ms = 250.0;
  double protraction_max_ms = 3000.0;
  double retraction_max_ms = 3000.0;
  double protraction_threshold = 0.98;
  double retraction_threshold = 0.03;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct PendingEvent {
  Unit unit;
  double fire_at_ms;

  friend bool operator==(const PendingEvent&, const PendingEvent&) = default;
};

struct NeuralState {
  UnitArray units{};
  Phase phase = Phase::Idle;
  BehaviorMode mode = BehaviorMode::Quiescent;
  double now_ms = 0.0;  // time stamp of the next tick
  double phase_onset_ms = 0.0;
  std::optional<double> ru1_onset_ms;
  std::vector<PendingEvent> pending;
  std::uint8_t next_sequence = 0;

  bool unit(Unit u) const { return units[index(u)]; }
  std::optional<double> since_protraction_onset() const;
  std::optional<double> since_ru1_onset() const;

  friend bool operator==(const NeuralState&, const NeuralState&) = default;
};

/// Commands crossing from the neural controller to the pressure controller.
struct MotorCommands {
  bool ru1 = false;
  bool ru2 = false;
  bool ru3 = false;
  bool b10 = false;
  bool b38 = false;
  bool b43_b45 = false;
  bool opener = false;
  bool closer = false;
  bool i2_drive = false;

  friend bool operator==(const MotorCommands&, const MotorCommands&) = default;
};

struct MotorFrame {
  MotorCommands commands;
  std::uint8_t sequence = 0;
  double timestamp_ms = 0.0;

  friend bool operator==(const MotorFrame&, const MotorFrame&) = default;
};

MotorFrame make_frame(const NeuralState& ns, std::uint8_t sequence, double timestamp_ms);

struct StepResult {
  NeuralState state;
  MotorFrame frame;
};

/// Advances the controller by one tick of length dt_ms. The tick is evaluated
/// at ns.now_ms: phase transitions first, then delayed-event firing, then the
/// combinational units. Throws std::invalid_argument when dt_ms <= 0.
StepResult step_neural(NeuralState ns, const StimulusState& s, const ProprioFeedback& proprio,
                       double dt_ms, const DelayParams& p,
                       const BehaviorMap& map = BehaviorMap::standard());

}  // namespace slugbot::neural
