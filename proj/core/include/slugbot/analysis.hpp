#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slugbot/config.hpp"
#include "slugbot/mechanics.hpp"
#include "slugbot/trace.hpp"

namespace slugbot::analysis {

using mech::CycleBounds;

inline constexpr std::size_t kGridPoints = 101;  // 0%..100% inclusive
using Grid = std::array<double, kGridPoints>;

inline constexpr double kCrossingThreshold = 0.5;

/// Cycles between consecutive rising edges of a Boolean signal. The sample
/// before the first one counts as off. Fewer than two edges yields no cycles.
std::vector<CycleBounds> segment_cycles(std::span<const double> b31_b32);
std::vector<CycleBounds> segment_cycles(const Trace& trace);

/// Drops `warmup` leading cycles and keeps at most `count` of the rest.
std::vector<CycleBounds> select_cycles(const std::vector<CycleBounds>& cycles, int warmup, int count);

/// Linear resampling of samples[begin..end] onto the grid; grid 100% lands on
/// sample `end`, the first sample of the following cycle.
Grid resample_cycle(std::span<const double> samples, const CycleBounds& c);

/// Grid index of the first upward (on) and downward (off) pass through the
/// threshold. The on edge is the first point >= threshold after a point below
/// it; the off edge mirrors that. A signal that never passes has no edge.
struct Crossings {
  std::optional<double> on;
  std::optional<double> off;

  friend bool operator==(const Crossings&, const Crossings&) = default;
};
Crossings find_crossings(const Grid& g, double threshold = kCrossingThreshold);

struct NamedSignal {
  std::string name;
  std::vector<double> values;
  bool boolean = false;
};

struct SignalProfile {
  bool boolean = false;
  Grid mean{};
  Grid stddev{};  // population standard deviation across cycles
  std::vector<Crossings> crossings;  // one entry per cycle, Boolean signals only
};

struct CycleProfile {
  std::size_t n_cycles = 0;
  std::vector<double> cycle_lengths_ms;
  int shift_points = 0;  // circular shift applied to every cycle, in grid steps
  std::vector<std::string> order;
  std::map<std::string, SignalProfile> signals;

  const SignalProfile& at(const std::string& name) const;
};

struct NormalizeOptions {
  bool align_peak_retraction = false;
  double align_phase_pct = 0.0;
  std::string position_signal = "x";
};

/// Throws std::invalid_argument when `cycles` is empty.
CycleProfile normalize_average(const std::vector<NamedSignal>& signals,
                               const std::vector<CycleBounds>& cycles, double dt_ms,
                               const NormalizeOptions& opts = {});

/// Boolean units, x, theta, closure, channel activations and pressures.
std::vector<NamedSignal> standard_signals(const Trace& trace);

CycleProfile normalize_average(const Trace& trace, const std::vector<CycleBounds>& cycles,
                               const NormalizeOptions& opts = {});

struct EdgeJitter {
  std::optional<double> on;
  std::optional<double> off;
  std::size_t on_count = 0;   // cycles in which the on edge exists
  std::size_t off_count = 0;
};

struct JitterReport {
  std::map<std::string, EdgeJitter> signals;
  std::optional<double> max_pct;
  std::string max_signal;
};

/// Range (max - min) of crossing phases across cycles, per Boolean signal and
/// edge. Throws std::invalid_argument with fewer than two cycles.
JitterReport timing_jitter(const CycleProfile& profile);

struct KinematicReport {
  bool degenerate = false;
  std::string reason;
  double peak_protraction_pct = 0.0;
  double peak_protraction_x = 0.0;
  double peak_retraction_pct = 0.0;
  double peak_retraction_x = 0.0;
  double mid_retraction_pct = 0.0;
  double mid_retraction_x = 0.0;
  double theta_swing_deg = 0.0;
  double protraction_swing_deg = 0.0;
  double retraction_swing_deg = 0.0;
  double theta_peak_pct = 0.0;
  double theta_x_peak_lag_pct = 0.0;  // circular distance between the x and theta maxima
  bool ordering_ok = false;
  bool rotation_ok = false;
};

/// Peak protraction, mid retraction and peak retraction on the mean x profile,
/// with rotation swings measured over the protraction arc (peak retraction to
/// peak protraction) and the retraction arc (the rest of the cycle).
KinematicReport kinematic_checkpoints(const CycleProfile& profile, double target_deg = 90.0,
                                      double tolerance_deg = 10.0);

/// Ring activation onsets within one complete retraction, relative to its start.
struct PeristalsisWave {
  double start_ms = 0.0;
  double duration_ms = 0.0;
  std::array<std::optional<double>, plant::kRingCount> onset_ms{};
  bool ordered = false;       // non-decreasing anterior to posterior, absent as +infinity
  std::size_t distinct = 0;   // distinct onset times among rings that cross
};

std::vector<PeristalsisWave> peristalsis(const Trace& trace, const std::vector<CycleBounds>& cycles);

/// Everything the harness reports for one trace.
struct AnalysisReport {
  std::size_t total_cycles = 0;
  std::vector<CycleBounds> analyzed;
  CycleProfile profile;
  std::optional<JitterReport> jitter;
  KinematicReport kinematics;
  std::vector<PeristalsisWave> waves;
  std::vector<double> transport_mm;
  bool ru3_fired = false;
};

AnalysisReport analyze(const Trace& trace, const AnalysisConfig& cfg);

nlohmann::json to_json(const CycleProfile& p);
CycleProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JitterReport& r);
nlohmann::json to_json(const KinematicReport& r);
nlohmann::json to_json(const AnalysisReport& r);

struct ProfileDiff {
  std::map<std::string, double> max_mean_abs_diff;
  double worst = 0.0;
  std::string worst_signal;
};

/// Compares signals present in both profiles.
ProfileDiff compare_profiles(const CycleProfile& a, const CycleProfile& b);

}  // namespace slugbot::analysis
