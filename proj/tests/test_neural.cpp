#include <gtest/gtest.h>

#include <random>

#include "slugbot/neural.hpp"
#include "support/event_oracle.hpp"

using namespace slugbot;
using namespace slugbot::neural;

namespace {

StimulusState stim(bool mech_lips, bool chem_lips, bool mech_grasper, bool arousal) {
  return {mech_lips, chem_lips, mech_grasper, arousal};
}

// Steps `n` ticks with constant inputs, returning the final state.
NeuralState run(NeuralState ns, const StimulusState& s, double x_hat, int n, const DelayParams& p = {}) {
  for (int i = 0; i < n; ++i) ns = step_neural(std::move(ns), s, {x_hat, 0.0}, 1.0, p).state;
  return ns;
}

const StimulusState kSwallow = stim(true, true, true, true);
const StimulusState kBite = stim(true, true, false, true);
const StimulusState kReject = stim(false, false, true, true);

}  // namespace

TEST(BehaviorMap, TableExamples) {
  EXPECT_EQ(classify_behavior(kSwallow), BehaviorMode::Swallow);
  EXPECT_EQ(classify_behavior(kBite), BehaviorMode::Bite);
  EXPECT_EQ(classify_behavior(kReject), BehaviorMode::Reject);
  EXPECT_EQ(classify_behavior(stim(true, false, true, true)), BehaviorMode::Reject);
  EXPECT_EQ(classify_behavior(stim(true, true, true, false)), BehaviorMode::Quiescent);
  EXPECT_EQ(classify_behavior(stim(false, true, false, true)), BehaviorMode::Quiescent);
  EXPECT_EQ(classify_behavior(StimulusState{}), BehaviorMode::Quiescent);
}

TEST(BehaviorMap, StandardMapMatchesBuiltInTableOnAllInputs) {
  const auto map = BehaviorMap::standard();
  for (int bits = 0; bits < 16; ++bits) {
    const auto s = stim(bits & 1, bits & 2, bits & 4, bits & 8);
    EXPECT_EQ(classify_behavior(s, map), classify_behavior(s)) << bits;
  }
}

TEST(BehaviorMap, FirstMatchingRuleWins) {
  BehaviorMap map;
  map.rules.push_back({BehaviorMode::Reject, std::nullopt, std::nullopt, std::nullopt, true});
  map.rules.push_back({BehaviorMode::Swallow, std::nullopt, std::nullopt, std::nullopt, true});
  EXPECT_EQ(classify_behavior(kSwallow, map), BehaviorMode::Reject);
  EXPECT_EQ(classify_behavior(StimulusState{}, map), BehaviorMode::Quiescent);
}

TEST(BehaviorMap, ParseModeIgnoresCase) {
  EXPECT_EQ(parse_mode("swallow"), BehaviorMode::Swallow);
  EXPECT_EQ(parse_mode("REJECT"), BehaviorMode::Reject);
  EXPECT_FALSE(parse_mode("chew"));
}

TEST(NeuralStep, RejectsNonPositiveDt) {
  EXPECT_THROW(step_neural({}, kSwallow, {}, 0.0, {}), std::invalid_argument);
  EXPECT_THROW(step_neural({}, kSwallow, {}, -1.0, {}), std::invalid_argument);
}

TEST(NeuralStep, QuiescentStaysIdle) {
  const auto ns = run({}, StimulusState{}, 0.0, 500);
  EXPECT_EQ(ns.phase, Phase::Idle);
  for (bool u : ns.units) EXPECT_FALSE(u);
}

TEST(NeuralStep, SwallowStartsInProtractionWithOpenerAndB38) {
  const auto r = step_neural({}, kSwallow, {0.0, 0.0}, 1.0, {});
  EXPECT_EQ(r.state.phase, Phase::Protraction);
  EXPECT_TRUE(r.state.unit(Unit::B31_B32));
  EXPECT_TRUE(r.state.unit(Unit::B38));
  EXPECT_TRUE(r.state.unit(Unit::Opener));
  EXPECT_FALSE(r.state.unit(Unit::Closer));
  EXPECT_TRUE(r.state.unit(Unit::CBI3));
  EXPECT_TRUE(r.frame.commands.i2_drive);
  EXPECT_EQ(r.frame.timestamp_ms, 0.0);
  EXPECT_EQ(r.frame.sequence, 0);
}

TEST(NeuralStep, BiteHasNoB38) {
  const auto r = step_neural({}, kBite, {0.0, 0.0}, 1.0, {});
  EXPECT_TRUE(r.state.unit(Unit::B31_B32));
  EXPECT_FALSE(r.state.unit(Unit::B38));
}

TEST(NeuralStep, RejectClosesDuringProtractionAndOpensDuringRetraction) {
  auto ns = run({}, kReject, 0.0, 1);
  EXPECT_TRUE(ns.unit(Unit::Closer));
  EXPECT_FALSE(ns.unit(Unit::Opener));
  EXPECT_FALSE(ns.unit(Unit::CBI3));
  ns = run(std::move(ns), kReject, 1.0, 1);
  EXPECT_EQ(ns.phase, Phase::Retraction);
  EXPECT_TRUE(ns.unit(Unit::Opener));
  EXPECT_FALSE(ns.unit(Unit::Closer));
}

TEST(NeuralStep, ProtractionEndsAtThreshold) {
  DelayParams p;
  auto ns = run({}, kSwallow, 0.5, 10, p);
  EXPECT_EQ(ns.phase, Phase::Protraction);
  ns = run(std::move(ns), kSwallow, p.protraction_threshold, 1, p);
  EXPECT_EQ(ns.phase, Phase::Retraction);
  EXPECT_TRUE(ns.unit(Unit::B64));
  EXPECT_TRUE(ns.unit(Unit::B43_B45));
  EXPECT_TRUE(ns.unit(Unit::RU1));
  EXPECT_TRUE(ns.unit(Unit::Closer));
}

TEST(NeuralStep, ProtractionTimesOutAfterMax) {
  DelayParams p;
  // Onset at t = 0; t - onset > 3000 first holds at t = 3001, the 3002nd tick.
  auto ns = run({}, kSwallow, 0.5, 3001, p);
  EXPECT_EQ(ns.phase, Phase::Protraction);
  ns = run(std::move(ns), kSwallow, 0.5, 1, p);
  EXPECT_EQ(ns.phase, Phase::Retraction);
}

TEST(NeuralStep, Ru2FiresExactly300msAfterRetractionOnset) {
  DelayParams p;
  auto ns = run({}, kSwallow, 1.0, 1, p);  // protraction at t = 0
  ns = run(std::move(ns), kSwallow, 1.0, 1, p);  // retraction onset t = 1
  ASSERT_EQ(ns.phase, Phase::Retraction);
  ASSERT_EQ(ns.phase_onset_ms, 1.0);
  // Ticks t = 2 .. 300 keep RU2 off; the tick at t = 301 turns it on.
  ns = run(std::move(ns), kSwallow, 0.5, 299, p);
  EXPECT_EQ(ns.now_ms, 301.0);
  EXPECT_FALSE(ns.unit(Unit::RU2));
  ns = run(std::move(ns), kSwallow, 0.5, 1, p);
  EXPECT_TRUE(ns.unit(Unit::RU2));
  EXPECT_FALSE(ns.unit(Unit::RU3));
  EXPECT_EQ(*ns.since_ru1_onset(), 301.0);
}

TEST(NeuralStep, Ru3NeverFiresWhenRetractionIsShorterThanItsDelay) {
  DelayParams p;
  NeuralState ns;
  // Alternate 400 ms protraction and 900 ms retraction by driving x directly.
  for (int cycle = 0; cycle < 10; ++cycle) {
    ns = run(std::move(ns), kSwallow, 0.5, 400, p);
    ns = run(std::move(ns), kSwallow, 1.0, 1, p);
    ns = run(std::move(ns), kSwallow, 0.5, 900, p);
    EXPECT_FALSE(ns.unit(Unit::RU3));
    ns = run(std::move(ns), kSwallow, 0.0, 1, p);
  }
}

TEST(NeuralStep, B10LatchesAfterDelayWithinProtraction) {
  DelayParams p;
  auto ns = run({}, kSwallow, 0.5, 250, p);  // t = 0..249
  EXPECT_FALSE(ns.unit(Unit::B10));
  ns = run(std::move(ns), kSwallow, 0.5, 1, p);  // t = 250
  EXPECT_TRUE(ns.unit(Unit::B10));
  ns = run(std::move(ns), kSwallow, 0.5, 100, p);
  EXPECT_TRUE(ns.unit(Unit::B10));
  ns = run(std::move(ns), kSwallow, 1.0, 1, p);
  EXPECT_FALSE(ns.unit(Unit::B10));
}

TEST(NeuralStep, QuiescenceClearsEverything) {
  auto ns = run({}, kSwallow, 0.5, 600);
  ns = run(std::move(ns), StimulusState{}, 0.5, 1);
  EXPECT_EQ(ns.phase, Phase::Idle);
  EXPECT_TRUE(ns.pending.empty());
  for (bool u : ns.units) EXPECT_FALSE(u);
}

TEST(NeuralStep, ModeSwitchWithoutQuiescenceKeepsPhase) {
  auto ns = run({}, kSwallow, 0.5, 10);
  const double onset = ns.phase_onset_ms;
  ns = run(std::move(ns), kBite, 0.5, 1);
  EXPECT_EQ(ns.phase, Phase::Protraction);
  EXPECT_EQ(ns.phase_onset_ms, onset);
  EXPECT_FALSE(ns.unit(Unit::B38));
}

TEST(NeuralStep, SequenceNumbersWrap) {
  NeuralState ns;
  for (int i = 0; i < 300; ++i) {
    auto r = step_neural(std::move(ns), kSwallow, {0.5, 0.0}, 1.0, {});
    EXPECT_EQ(r.frame.sequence, static_cast<std::uint8_t>(i));
    ns = std::move(r.state);
  }
}

TEST(DelayParams, ValidateNamesField) {
  DelayParams p;
  p.ru3_delay_ms = 100.0;
  try {
    p.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("ru3_delay_ms"), std::string::npos);
  }
  DelayParams q;
  q.retraction_threshold = 0.99;
  EXPECT_THROW(q.validate(), std::invalid_argument);
  EXPECT_NO_THROW(DelayParams{}.validate());
}

// Invariants over random stimulus and proprioception sequences.
TEST(NeuralProperty, InvariantsHoldOnRandomInputs) {
  std::mt19937_64 rng(7);
  const DelayParams p;
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = oracle::random_input(rng, 20000);
    const auto ticks = oracle::run_stepper(in, p);
    for (std::size_t t = 0; t < ticks.size(); ++t) {
      const auto& u = ticks[t].units;
      auto on = [&](Unit x) { return u[index(x)]; };
      ASSERT_FALSE(on(Unit::Opener) && on(Unit::Closer)) << t;
      ASSERT_EQ(on(Unit::B43_B45), on(Unit::B64)) << t;
      ASSERT_FALSE(on(Unit::B31_B32) && on(Unit::B64)) << t;
      ASSERT_EQ(on(Unit::RU1), on(Unit::B64)) << t;
      ASSERT_TRUE(!on(Unit::RU2) || on(Unit::RU1)) << t;
      ASSERT_TRUE(!on(Unit::RU3) || on(Unit::RU2)) << t;
      ASSERT_TRUE(!on(Unit::B10) || on(Unit::B31_B32)) << t;
      ASSERT_EQ(ticks[t].phase == Phase::Idle, ticks[t].mode == BehaviorMode::Quiescent) << t;
    }
  }
}

TEST(NeuralProperty, SteppingIsDeterministic) {
  std::mt19937_64 rng(11);
  const auto in = oracle::random_input(rng, 30000);
  const auto a = oracle::run_stepper(in, {});
  const auto b = oracle::run_stepper(in, {});
  for (std::size_t t = 0; t < a.size(); ++t) ASSERT_EQ(a[t].units, b[t].units);
}

TEST(EventOracle, EventsAreSorted) {
  std::mt19937_64 rng(3);
  const auto in = oracle::random_input(rng, 60000);
  const auto ev = oracle::oracle_events(in, {});
  ASSERT_FALSE(ev.empty());
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_LE(ev[i - 1].tick, ev[i].tick);
}

TEST(EventOracle, HandWorkedSchedule) {
  // Swallow from t = 0; x reaches the protraction threshold at t = 500 and
  // the retraction threshold at t = 900.
  oracle::OracleInput in;
  in.ticks = 1200;
  in.stimulus = {{0, kSwallow}};
  in.proprio = {{0, 0.5}, {500, 1.0}, {900, 0.0}, {901, 0.5}};
  const auto ev = oracle::oracle_events(in, {});
  using K = oracle::EventKind;
  std::vector<std::pair<std::int64_t, K>> got;
  for (const auto& e : ev) got.emplace_back(e.tick, e.kind);
  const std::vector<std::pair<std::int64_t, K>> want = {
      {0, K::ModeChange}, {0, K::EnterProtraction}, {250, K::B10Fires}, {500, K::EnterRetraction},
      {800, K::RU2Fires}, {900, K::EnterProtraction}, {1150, K::B10Fires}};
  EXPECT_EQ(got, want);
}

TEST(EventOracle, MatchesStepperOnRandomSchedules) {
  std::mt19937_64 rng(20260101);
  const DelayParams p;
  for (int trial = 0; trial < 25; ++trial) {
    const auto in = oracle::random_input(rng, 60000);
    const auto want = oracle::render_events(oracle::oracle_events(in, p), in.ticks);
    const auto got = oracle::run_stepper(in, p);
    for (std::size_t t = 0; t < got.size(); ++t) {
      ASSERT_EQ(got[t].units, want[t].units) << "trial " << trial << " tick " << t;
      ASSERT_EQ(got[t].phase, want[t].phase) << "trial " << trial << " tick " << t;
    }
  }
}

TEST(EventOracle, MatchesStepperWithShortDelays) {
  // Delays short enough that RU3 fires regularly.
  DelayParams p;
  p.ru2_delay_ms = 40.0;
  p.ru3_delay_ms = 90.0;
  p.b10_delay_ms = 0.0;
  p.protraction_max_ms = 400.0;
  p.retraction_max_ms = 700.0;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto in = oracle::random_input(rng, 20000);
    const auto want = oracle::render_events(oracle::oracle_events(in, p), in.ticks);
    const auto got = oracle::run_stepper(in, p);
    for (std::size_t t = 0; t < got.size(); ++t) {
      ASSERT_EQ(got[t].units, want[t].units) << "trial " << trial << " tick " << t;
    }
  }
}
