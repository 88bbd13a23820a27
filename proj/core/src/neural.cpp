#include "slugbot/neural.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

namespace slugbot::neural {

namespace {

constexpr double kFireEpsilonMs = 1e-9;

constexpr std::array<std::string_view, kUnitCount> kUnitNames = {
    "B31_B32", "B64", "CBI3", "B38", "B10", "B43_B45", "Opener", "Closer", "RU1", "RU2", "RU3"};

bool match(const std::optional<bool>& want, bool have) { return !want || *want == have; }

void begin_protraction(NeuralState& ns, double t, const DelayParams& p) {
  ns.phase = Phase::Protraction;
  ns.phase_onset_ms = t;
  ns.ru1_onset_ms.reset();
  ns.pending = {{Unit::B10, t + p.b10_delay_ms}};
}

void begin_retraction(NeuralState& ns, double t, const DelayParams& p) {
  ns.phase = Phase::Retraction;
  ns.phase_onset_ms = t;
  ns.ru1_onset_ms = t;
  ns.pending = {{Unit::RU2, t + p.ru2_delay_ms}, {Unit::RU3, t + p.ru3_delay_ms}};
}

}  // namespace

std::string_view to_string(BehaviorMode m) {
  switch (m) {
    case BehaviorMode::Quiescent: return "Quiescent";
    case BehaviorMode::Bite: return "Bite";
    case BehaviorMode::Swallow: return "Swallow";
    case BehaviorMode::Reject: return "Reject";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "Idle";
    case Phase::Protraction: return "Protraction";
    case Phase::Retraction: return "Retraction";
  }
  return "?";
}

std::string_view to_string(Unit u) { return kUnitNames[index(u)]; }

std::optional<BehaviorMode> parse_mode(std::string_view name) {
  for (auto m : {BehaviorMode::Quiescent, BehaviorMode::Bite, BehaviorMode::Swallow,
                 BehaviorMode::Reject}) {
    const auto want = to_string(m);
    const bool same = want.size() == name.size() &&
                      std::equal(want.begin(), want.end(), name.begin(), [](char a, char b) {
                        return std::tolower(static_cast<unsigned char>(a)) ==
                               std::tolower(static_cast<unsigned char>(b));
                      });
    if (same) return m;
  }
  return std::nullopt;
}

bool is_ingestive(BehaviorMode m) { return m == BehaviorMode::Bite || m == BehaviorMode::Swallow; }

bool BehaviorRule::matches(const StimulusState& s) const {
  return match(mech_lips, s.mech_lips) && match(chem_lips, s.chem_lips) &&
         match(mech_grasper, s.mech_grasper) && match(arousal, s.arousal);
}

BehaviorMap BehaviorMap::standard() {
  BehaviorMap map;
  map.rules.push_back({BehaviorMode::Swallow, true, true, true, true});
  map.rules.push_back({BehaviorMode::Bite, true, true, false, true});
  map.rules.push_back({BehaviorMode::Reject, std::nullopt, false, true, true});
  return map;
}

BehaviorMode classify_behavior(const StimulusState& s) {
  if (!s.arousal) return BehaviorMode::Quiescent;
  if (s.chem_lips && s.mech_lips) return s.mech_grasper ? BehaviorMode::Swallow : BehaviorMode::Bite;
  if (s.mech_grasper && !s.chem_lips) return BehaviorMode::Reject;
  return BehaviorMode::Quiescent;
}

BehaviorMode classify_behavior(const StimulusState& s, const BehaviorMap& map) {
  for (const auto& rule : map.rules) {
    if (rule.matches(s)) return rule.mode;
  }
  return BehaviorMode::Quiescent;
}

void DelayParams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(ru2_delay_ms > 0.0)) fail("ru2_delay_ms", "must be > 0");
  if (!(ru3_delay_ms > ru2_delay_ms)) fail("ru3_delay_ms", "must exceed ru2_delay_ms");
  if (!(b10_delay_ms >= 0.0)) fail("b10_delay_ms", "must be >= 0");
  if (!(b10_delay_ms < protraction_max_ms)) fail("b10_delay_ms", "must be < protraction_max_ms");
  if (!(retraction_max_ms > 0.0)) fail("retraction_max_ms", "must be > 0");
  if (!(retraction_threshold >= 0.0)) fail("retraction_threshold", "must be >= 0");
  if (!(retraction_threshold < protraction_threshold))
    fail("retraction_threshold", "must be < protraction_threshold");
  if (!(protraction_threshold <= 1.0)) fail("protraction_threshold", "must be <= 1");
}

std::optional<double> NeuralState::since_protraction_onset() const {
  if (phase != Phase::Protraction) return std::nullopt;
  return now_ms - phase_onset_ms;
}

std::optional<double> NeuralState::since_ru1_onset() const {
  if (!ru1_onset_ms) return std::nullopt;
  return now_ms - *ru1_onset_ms;
}

MotorFrame make_frame(const NeuralState& ns, std::uint8_t sequence, double timestamp_ms) {
  MotorFrame f;
  f.commands.ru1 = ns.unit(Unit::RU1);
  f.commands.ru2 = ns.unit(Unit::RU2);
  f.commands.ru3 = ns.unit(Unit::RU3);
  f.commands.b10 = ns.unit(Unit::B10);
  f.commands.b38 = ns.unit(Unit::B38);
  f.commands.b43_b45 = ns.unit(Unit::B43_B45);
  f.commands.opener = ns.unit(Unit::Opener);
  f.commands.closer = ns.unit(Unit::Closer);
  f.commands.i2_drive = ns.unit(Unit::B31_B32);
  f.sequence = sequence;
  f.timestamp_ms = timestamp_ms;
  return f;
}

StepResult step_neural(NeuralState ns, const StimulusState& s, const ProprioFeedback& proprio,
                       double dt_ms, const DelayParams& p, const BehaviorMap& map) {
  if (!(dt_ms > 0.0)) throw std::invalid_argument("step_neural: dt must be > 0");

  const double t = ns.now_ms;
  const BehaviorMode mode = classify_behavior(s, map);
  ns.mode = mode;

  // Latched delayed units survive only within their phase.
  bool b10 = ns.unit(Unit::B10);
  bool ru2 = ns.unit(Unit::RU2);
  bool ru3 = ns.unit(Unit::RU3);

  if (mode == BehaviorMode::Quiescent) {
    ns.phase = Phase::Idle;
    ns.pending.clear();
    ns.ru1_onset_ms.reset();
    b10 = ru2 = ru3 = false;
  } else if (ns.phase == Phase::Idle) {
    begin_protraction(ns, t, p);
    b10 = ru2 = ru3 = false;
  } else if (ns.phase == Phase::Protraction) {
    if (proprio.x_hat >= p.protraction_threshold || t - ns.phase_onset_ms > p.protraction_max_ms) {
      begin_retraction(ns, t, p);
      b10 = ru2 = ru3 = false;
    }
  } else if (proprio.x_hat <= p.retraction_threshold ||
             t - ns.phase_onset_ms > p.retraction_max_ms) {
    begin_protraction(ns, t, p);
    b10 = ru2 = ru3 = false;
  }

  auto due = std::stable_partition(ns.pending.begin(), ns.pending.end(), [t](const PendingEvent& e) {
    return e.fire_at_ms > t + kFireEpsilonMs;
  });
  for (auto it = due; it != ns.pending.end(); ++it) {
    switch (it->unit) {
      case Unit::B10: b10 = true; break;
      case Unit::RU2: ru2 = true; break;
      case Unit::RU3: ru3 = true; break;
      default: break;
    }
  }
  ns.pending.erase(due, ns.pending.end());

  const bool protracting = ns.phase == Phase::Protraction;
  const bool retracting = ns.phase == Phase::Retraction;
  const bool ingestive = is_ingestive(mode);
  const bool reject = mode == BehaviorMode::Reject;

  UnitArray u{};
  u[index(Unit::B31_B32)] = protracting;
  u[index(Unit::B64)] = retracting;
  u[index(Unit::B43_B45)] = retracting;
  u[index(Unit::CBI3)] = ingestive;
  u[index(Unit::B38)] = protracting && mode == BehaviorMode::Swallow;
  u[index(Unit::B10)] = protracting && b10;
  u[index(Unit::RU1)] = retracting;
  u[index(Unit::RU2)] = retracting && ru2;
  u[index(Unit::RU3)] = retracting && ru3;
  u[index(Unit::Opener)] = (protracting && ingestive) || (retracting && reject);
  u[index(Unit::Closer)] = (retracting && ingestive) || (protracting && reject);
  ns.units = u;

  const std::uint8_t seq = ns.next_sequence++;
  MotorFrame frame = make_frame(ns, seq, t);
  ns.now_ms = t + dt_ms;
  return {std::move(ns), frame};
}

}  // namespace slugbot::neural
