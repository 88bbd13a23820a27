#include "event_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slugbot::oracle {

using neural::BehaviorMode;
using neural::Phase;
using neural::Unit;

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

// Feeding-behavior table, restated independently of the controller.
BehaviorMode table_mode(const neural::StimulusState& s) {
  if (s.arousal && s.chem_lips && s.mech_lips && s.mech_grasper) return BehaviorMode::Swallow;
  if (s.arousal && s.chem_lips && s.mech_lips && !s.mech_grasper) return BehaviorMode::Bite;
  if (s.arousal && !s.chem_lips && s.mech_grasper) return BehaviorMode::Reject;
  return BehaviorMode::Quiescent;
}

// First tick in [from, until) whose proprioceptive value satisfies `cond`.
template <class Cond>
std::int64_t first_satisfying(const std::vector<ProprioChange>& pro, std::int64_t from, std::int64_t until,
                              Cond cond) {
  auto it = std::upper_bound(pro.begin(), pro.end(), from,
                             [](std::int64_t t, const ProprioChange& c) { return t < c.tick; });
  if (it != pro.begin()) --it;
  for (; it != pro.end() && it->tick < until; ++it) {
    if (cond(it->x_hat)) return std::max(it->tick, from);
  }
  return kNever;
}

// First whole tick strictly later than onset + span.
std::int64_t first_tick_after(std::int64_t onset, double span) {
  return static_cast<std::int64_t>(std::floor(static_cast<double>(onset) + span)) + 1;
}

// First whole tick at or after onset + delay.
std::int64_t first_tick_at(std::int64_t onset, double delay) {
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(onset) + delay));
}

int kind_rank(EventKind k) {
  switch (k) {
    case EventKind::ModeChange: return 0;
    case EventKind::EnterIdle:
    case EventKind::EnterProtraction:
    case EventKind::EnterRetraction: return 1;
    default: return 2;
  }
}

}  // namespace

std::vector<OracleEvent> oracle_events(const OracleInput& in, const neural::DelayParams& p) {
  if (in.stimulus.empty() || in.stimulus.front().tick != 0 || in.proprio.empty() || in.proprio.front().tick != 0) {
    throw std::invalid_argument("oracle input must start at tick 0");
  }
  std::vector<OracleEvent> events;

  // Mode changes, and the maximal runs of non-quiescent behavior.
  struct Interval {
    std::int64_t begin, end;
  };
  std::vector<Interval> active;
  BehaviorMode prev = BehaviorMode::Quiescent;
  std::int64_t active_from = -1;
  for (const auto& c : in.stimulus) {
    if (c.tick >= in.ticks) break;
    const BehaviorMode m = table_mode(c.stimulus);
    if (m == prev) continue;
    events.push_back({c.tick, EventKind::ModeChange, m});
    if (prev == BehaviorMode::Quiescent) active_from = c.tick;
    if (m == BehaviorMode::Quiescent) {
      active.push_back({active_from, c.tick});
      active_from = -1;
    }
    prev = m;
  }
  if (active_from >= 0) active.push_back({active_from, in.ticks});

  for (const auto& iv : active) {
    Phase phase = Phase::Protraction;
    std::int64_t onset = iv.begin;
    while (true) {
      events.push_back({onset, phase == Phase::Protraction ? EventKind::EnterProtraction : EventKind::EnterRetraction});
      const bool pro = phase == Phase::Protraction;
      const std::int64_t timeout = first_tick_after(onset, pro ? p.protraction_max_ms : p.retraction_max_ms);
      const std::int64_t crossing =
          pro ? first_satisfying(in.proprio, onset + 1, std::min(timeout, iv.end),
                                 [&](double x) { return x >= p.protraction_threshold; })
              : first_satisfying(in.proprio, onset + 1, std::min(timeout, iv.end),
                                 [&](double x) { return x <= p.retraction_threshold; });
      const std::int64_t next = std::min({crossing, timeout, iv.end});

      auto fire = [&](double delay, EventKind kind) {
        const std::int64_t t = first_tick_at(onset, delay);
        if (t < next) events.push_back({t, kind});
      };
      if (pro) {
        fire(p.b10_delay_ms, EventKind::B10Fires);
      } else {
        fire(p.ru2_delay_ms, EventKind::RU2Fires);
        fire(p.ru3_delay_ms, EventKind::RU3Fires);
      }

      if (next >= iv.end) break;
      phase = pro ? Phase::Retraction : Phase::Protraction;
      onset = next;
    }
    if (iv.end < in.ticks) events.push_back({iv.end, EventKind::EnterIdle});
  }

  std::stable_sort(events.begin(), events.end(), [](const OracleEvent& a, const OracleEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return kind_rank(a.kind) < kind_rank(b.kind);
  });
  return events;
}

std::vector<OracleTick> render_events(const std::vector<OracleEvent>& events, std::int64_t ticks) {
  std::vector<OracleTick> out(static_cast<std::size_t>(ticks));
  BehaviorMode mode = BehaviorMode::Quiescent;
  Phase phase = Phase::Idle;
  bool b10 = false, ru2 = false, ru3 = false;
  std::size_t next = 0;
  for (std::int64_t t = 0; t < ticks; ++t) {
    for (; next < events.size() && events[next].tick == t; ++next) {
      switch (events[next].kind) {
        case EventKind::ModeChange: mode = events[next].mode; break;
        case EventKind::EnterIdle: phase = Phase::Idle; b10 = ru2 = ru3 = false; break;
        case EventKind::EnterProtraction: phase = Phase::Protraction; b10 = ru2 = ru3 = false; break;
        case EventKind::EnterRetraction: phase = Phase::Retraction; b10 = ru2 = ru3 = false; break;
        case EventKind::B10Fires: b10 = true; break;
        case EventKind::RU2Fires: ru2 = true; break;
        case EventKind::RU3Fires: ru3 = true; break;
      }
    }
    const bool pro = phase == Phase::Protraction;
    const bool ret = phase == Phase::Retraction;
    const bool ingest = mode == BehaviorMode::Bite || mode == BehaviorMode::Swallow;
    const bool reject = mode == BehaviorMode::Reject;

    auto& o = out[static_cast<std::size_t>(t)];
    o.mode = mode;
    o.phase = phase;
    auto set = [&](Unit u, bool v) { o.units[neural::index(u)] = v; };
    set(Unit::B31_B32, pro);
    set(Unit::B64, ret);
    set(Unit::CBI3, ingest);
    set(Unit::B38, pro && mode == BehaviorMode::Swallow);
    set(Unit::B10, pro && b10);
    set(Unit::B43_B45, ret);
    set(Unit::Opener, (pro && ingest) || (ret && reject));
    set(Unit::Closer, (ret && ingest) || (pro && reject));
    set(Unit::RU1, ret);
    set(Unit::RU2, ret && ru2);
    set(Unit::RU3, ret && ru3);
  }
  return out;
}

OracleInput random_input(std::mt19937_64& rng, std::int64_t ticks) {
  OracleInput in;
  in.ticks = ticks;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto span = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };

  for (std::int64_t t = 0; t < ticks; t += span(100, 8000)) {
    neural::StimulusState s;
    s.arousal = u01(rng) < 0.85;
    s.chem_lips = u01(rng) < 0.6;
    s.mech_lips = u01(rng) < 0.7;
    s.mech_grasper = u01(rng) < 0.5;
    in.stimulus.push_back({t, s});
  }

  // Values straddle both thresholds, including exact equality.
  const double levels[] = {0.0, 0.02, 0.03, 0.0300001, 0.2, 0.5, 0.8, 0.9799999, 0.98, 0.99, 1.0};
  for (std::int64_t t = 0; t < ticks;) {
    const double x = u01(rng) < 0.8 ? levels[span(0, std::size(levels) - 1)] : u01(rng);
    in.proprio.push_back({t, x});
    t += u01(rng) < 0.1 ? span(2500, 7000) : span(1, 1500);
  }
  return in;
}

std::vector<OracleTick> run_stepper(const OracleInput& in, const neural::DelayParams& p) {
  std::vector<OracleTick> out(static_cast<std::size_t>(in.ticks));
  neural::NeuralState ns;
  std::size_t si = 0, pi = 0;
  for (std::int64_t t = 0; t < in.ticks; ++t) {
    while (si + 1 < in.stimulus.size() && in.stimulus[si + 1].tick <= t) ++si;
    while (pi + 1 < in.proprio.size() && in.proprio[pi + 1].tick <= t) ++pi;
    auto r = neural::step_neural(std::move(ns), in.stimulus[si].stimulus, {in.proprio[pi].x_hat, 0.0}, 1.0, p);
    ns = std::move(r.state);
    auto& o = out[static_cast<std::size_t>(t)];
    o.units = ns.units;
    o.phase = ns.phase;
    o.mode = ns.mode;
  }
  return out;
}

}  // namespace slugbot::oracle
