#include "slugbot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace slugbot::analysis {

using nlohmann::json;
using neural::Unit;

namespace {

constexpr int kPeriodPoints = static_cast<int>(kGridPoints) - 1;  // 100 distinct phases

int wrap(int k) { return ((k % kPeriodPoints) + kPeriodPoints) % kPeriodPoints; }

double circular_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 100.0);
  return std::min(d, 100.0 - d);
}

// Rotates a periodic grid so that phase k moves to k + shift. Point 100 is
// the same phase as point 0 after the rotation.
Grid rotate(const Grid& g, int shift) {
  if (shift == 0) return g;
  Grid out{};
  for (int k = 0; k < kPeriodPoints; ++k) out[static_cast<std::size_t>(wrap(k + shift))] = g[static_cast<std::size_t>(k)];
  out[kGridPoints - 1] = out[0];
  return out;
}

std::size_t argmax(const Grid& g, std::size_t n = kGridPoints) {
  return static_cast<std::size_t>(std::max_element(g.begin(), g.begin() + static_cast<long>(n)) - g.begin());
}

std::size_t argmin(const Grid& g, std::size_t n = kGridPoints) {
  return static_cast<std::size_t>(std::min_element(g.begin(), g.begin() + static_cast<long>(n)) - g.begin());
}

// Indices visited walking forward (circularly) from `from` to `to`, inclusive.
std::vector<std::size_t> arc(std::size_t from, std::size_t to) {
  std::vector<std::size_t> idx;
  int k = static_cast<int>(from) % kPeriodPoints;
  const int stop = static_cast<int>(to) % kPeriodPoints;
  while (true) {
    idx.push_back(static_cast<std::size_t>(k));
    if (k == stop) break;
    k = wrap(k + 1);
  }
  return idx;
}

void grid_stats(const std::vector<Grid>& grids, Grid& mean, Grid& stddev) {
  const double n = static_cast<double>(grids.size());
  for (std::size_t k = 0; k < kGridPoints; ++k) {
    double sum = 0.0;
    for (const auto& g : grids) sum += g[k];
    const double m = sum / n;
    double ss = 0.0;
    for (const auto& g : grids) ss += (g[k] - m) * (g[k] - m);
    mean[k] = m;
    stddev[k] = std::sqrt(ss / n);
  }
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::vector<CycleBounds> segment_cycles(std::span<const double> b31_b32) {
  std::vector<std::size_t> rises;
  bool prev = false;
  for (std::size_t i = 0; i < b31_b32.size(); ++i) {
    const bool on = b31_b32[i] >= kCrossingThreshold;
    if (on && !prev) rises.push_back(i);
    prev = on;
  }
  std::vector<CycleBounds> cycles;
  for (std::size_t i = 1; i < rises.size(); ++i) cycles.push_back({rises[i - 1], rises[i]});
  return cycles;
}

std::vector<CycleBounds> segment_cycles(const Trace& trace) {
  return segment_cycles(column_values(trace, "B31_B32"));
}

std::vector<CycleBounds> select_cycles(const std::vector<CycleBounds>& cycles, int warmup, int count) {
  const auto skip = static_cast<std::size_t>(std::max(warmup, 0));
  if (skip >= cycles.size()) return {};
  const auto keep = std::min(cycles.size() - skip, static_cast<std::size_t>(std::max(count, 0)));
  return {cycles.begin() + static_cast<long>(skip), cycles.begin() + static_cast<long>(skip + keep)};
}

Grid resample_cycle(std::span<const double> samples, const CycleBounds& c) {
  if (c.end <= c.begin || c.end >= samples.size()) {
    throw std::out_of_range("resample_cycle: cycle bounds outside samples");
  }
  const double len = static_cast<double>(c.end - c.begin);
  Grid g{};
  for (std::size_t k = 0; k < kGridPoints; ++k) {
    const double pos = static_cast<double>(c.begin) + len * static_cast<double>(k) / kPeriodPoints;
    const auto i0 = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i0);
    const std::size_t i1 = std::min(i0 + 1, c.end);
    g[k] = samples[i0] + frac * (samples[i1] - samples[i0]);
  }
  return g;
}

Crossings find_crossings(const Grid& g, double threshold) {
  Crossings c;
  for (std::size_t k = 1; k < kGridPoints; ++k) {
    const bool was = g[k - 1] >= threshold;
    const bool now = g[k] >= threshold;
    if (!was && now && !c.on) c.on = static_cast<double>(k);
    if (was && !now && !c.off) c.off = static_cast<double>(k);
  }
  return c;
}

const SignalProfile& CycleProfile::at(const std::string& name) const {
  auto it = signals.find(name);
  if (it == signals.end()) throw std::out_of_range("profile has no signal '" + name + "'");
  return it->second;
}

CycleProfile normalize_average(const std::vector<NamedSignal>& signals,
                               const std::vector<CycleBounds>& cycles, double dt_ms,
                               const NormalizeOptions& opts) {
  if (cycles.empty()) throw std::invalid_argument("normalize_average: no cycles");

  std::map<std::string, std::vector<Grid>> grids;
  for (const auto& s : signals) {
    auto& per_cycle = grids[s.name];
    per_cycle.reserve(cycles.size());
    for (const auto& c : cycles) per_cycle.push_back(resample_cycle(s.values, c));
  }

  CycleProfile p;
  p.n_cycles = cycles.size();
  for (const auto& c : cycles) p.cycle_lengths_ms.push_back(static_cast<double>(c.end - c.begin) * dt_ms);

  if (opts.align_peak_retraction) {
    auto it = grids.find(opts.position_signal);
    if (it == grids.end()) {
      throw std::invalid_argument("normalize_average: alignment needs signal '" + opts.position_signal + "'");
    }
    Grid mean{}, sd{};
    grid_stats(it->second, mean, sd);
    const int target = static_cast<int>(std::lround(opts.align_phase_pct)) % kPeriodPoints;
    p.shift_points = wrap(target - static_cast<int>(argmin(mean, kPeriodPoints)));
    for (auto& [name, per_cycle] : grids) {
      for (auto& g : per_cycle) g = rotate(g, p.shift_points);
    }
  }

  for (const auto& s : signals) {
    p.order.push_back(s.name);
    SignalProfile sp;
    sp.boolean = s.boolean;
    const auto& per_cycle = grids[s.name];
    grid_stats(per_cycle, sp.mean, sp.stddev);
    if (s.boolean) {
      for (const auto& g : per_cycle) sp.crossings.push_back(find_crossings(g));
    }
    p.signals[s.name] = std::move(sp);
  }
  return p;
}

std::vector<NamedSignal> standard_signals(const Trace& trace) {
  std::vector<NamedSignal> out;
  for (std::size_t u = 0; u < neural::kUnitCount; ++u) {
    const std::string name(neural::to_string(static_cast<Unit>(u)));
    out.push_back({name, column_values(trace, name), true});
  }
  for (const char* name : {"x", "theta_deg", "closure"}) {
    out.push_back({name, column_values(trace, name), false});
  }
  for (std::size_t i = 0; i < plant::kChannelCount; ++i) {
    const std::string role(plant::to_string(static_cast<plant::ChannelRole>(i)));
    out.push_back({role + "_act", column_values(trace, role + "_act"), false});
    out.push_back({role + "_p", column_values(trace, role + "_p"), false});
  }
  return out;
}

CycleProfile normalize_average(const Trace& trace, const std::vector<CycleBounds>& cycles,
                               const NormalizeOptions& opts) {
  const double dt = trace.size() > 1 ? trace[1].t_ms - trace[0].t_ms : 1.0;
  return normalize_average(standard_signals(trace), cycles, dt, opts);
}

JitterReport timing_jitter(const CycleProfile& profile) {
  if (profile.n_cycles < 2) throw std::invalid_argument("timing_jitter: needs at least two cycles");
  JitterReport r;
  auto consider = [&](const std::string& name, const std::optional<double>& j) {
    if (j && (!r.max_pct || *j > *r.max_pct)) {
      r.max_pct = *j;
      r.max_signal = name;
    }
  };
  for (const auto& name : profile.order) {
    const auto& sp = profile.signals.at(name);
    if (!sp.boolean) continue;
    EdgeJitter ej;
    std::vector<double> on, off;
    for (const auto& c : sp.crossings) {
      if (c.on) on.push_back(*c.on);
      if (c.off) off.push_back(*c.off);
    }
    ej.on_count = on.size();
    ej.off_count = off.size();
    if (!on.empty()) ej.on = *std::max_element(on.begin(), on.end()) - *std::min_element(on.begin(), on.end());
    if (!off.empty()) ej.off = *std::max_element(off.begin(), off.end()) - *std::min_element(off.begin(), off.end());
    consider(name + ".on", ej.on);
    consider(name + ".off", ej.off);
    r.signals[name] = ej;
  }
  return r;
}

KinematicReport kinematic_checkpoints(const CycleProfile& profile, double target_deg, double tolerance_deg) {
  KinematicReport k;
  const auto& x = profile.at("x").mean;
  const auto& th = profile.at("theta_deg").mean;

  const double xmax = *std::max_element(x.begin(), x.end());
  const double xmin = *std::min_element(x.begin(), x.end());
  bool nondec = true, noninc = true;
  for (std::size_t i = 1; i < kGridPoints; ++i) {
    if (x[i] < x[i - 1]) nondec = false;
    if (x[i] > x[i - 1]) noninc = false;
  }
  if (xmax - xmin < 1e-9) {
    k.degenerate = true;
    k.reason = "flat x";
  } else if (nondec || noninc) {
    k.degenerate = true;
    k.reason = "monotone x";
  }

  const std::size_t ipro = argmax(x, kPeriodPoints);
  const std::size_t iret = argmin(x, kPeriodPoints);
  k.peak_protraction_pct = static_cast<double>(ipro);
  k.peak_protraction_x = x[ipro];
  k.peak_retraction_pct = static_cast<double>(iret);
  k.peak_retraction_x = x[iret];

  const auto retraction_arc = arc(ipro, iret);
  const auto protraction_arc = arc(iret, ipro);
  const std::size_t imid = retraction_arc[retraction_arc.size() / 2];
  k.mid_retraction_pct = static_cast<double>(imid);
  k.mid_retraction_x = x[imid];

  auto swing = [&](const std::vector<std::size_t>& idx) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto i : idx) {
      lo = std::min(lo, th[i]);
      hi = std::max(hi, th[i]);
    }
    return hi - lo;
  };
  k.theta_swing_deg = *std::max_element(th.begin(), th.end()) - *std::min_element(th.begin(), th.end());
  k.protraction_swing_deg = swing(protraction_arc);
  k.retraction_swing_deg = swing(retraction_arc);
  k.rotation_ok = !k.degenerate && std::abs(k.protraction_swing_deg - target_deg) <= tolerance_deg &&
                  std::abs(k.retraction_swing_deg - target_deg) <= tolerance_deg;

  const std::size_t ith = argmax(th, kPeriodPoints);
  k.theta_peak_pct = static_cast<double>(ith);
  k.theta_x_peak_lag_pct = circular_distance(k.theta_peak_pct, k.peak_protraction_pct);

  // Peak protraction precedes peak retraction when the arc running forward
  // from the x maximum to the x minimum is mostly spent in retraction.
  if (!k.degenerate) {
    auto it = profile.signals.find("B64");
    if (it != profile.signals.end()) {
      std::size_t in_retraction = 0;
      for (auto i : retraction_arc) {
        if (it->second.mean[i] >= kCrossingThreshold) ++in_retraction;
      }
      k.ordering_ok = 2 * in_retraction > retraction_arc.size();
    } else {
      k.ordering_ok = ipro != iret;
    }
  }
  return k;
}

std::vector<PeristalsisWave> peristalsis(const Trace& trace, const std::vector<CycleBounds>& cycles) {
  std::vector<PeristalsisWave> waves;
  const auto b64 = neural::index(Unit::B64);
  for (const auto& c : cycles) {
    std::size_t rs = c.begin;
    while (rs < c.end && !trace[rs].units[b64]) ++rs;
    if (rs == c.end) continue;
    std::size_t re = rs;
    while (re < c.end && trace[re].units[b64]) ++re;
    if (re == trace.size()) continue;  // retraction still running at the end of the trace

    PeristalsisWave w;
    w.start_ms = trace[rs].t_ms;
    w.duration_ms = trace[re].t_ms - trace[rs].t_ms;
    for (std::size_t j = 0; j < plant::kRingCount; ++j) {
      for (std::size_t i = rs; i < re; ++i) {
        if (trace[i].channels[j].activation >= kCrossingThreshold) {
          w.onset_ms[j] = trace[i].t_ms - w.start_ms;
          break;
        }
      }
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    w.ordered = true;
    std::set<double> distinct;
    for (std::size_t j = 0; j < plant::kRingCount; ++j) {
      if (w.onset_ms[j]) distinct.insert(*w.onset_ms[j]);
      if (j > 0 && w.onset_ms[j].value_or(inf) < w.onset_ms[j - 1].value_or(inf)) w.ordered = false;
    }
    w.distinct = distinct.size();
    waves.push_back(w);
  }
  return waves;
}

AnalysisReport analyze(const Trace& trace, const AnalysisConfig& cfg) {
  AnalysisReport r;
  const auto all = segment_cycles(trace);
  r.total_cycles = all.size();
  r.analyzed = select_cycles(all, cfg.warmup_cycles, cfg.cycles);

  const auto ru3 = neural::index(Unit::RU3);
  r.ru3_fired = std::any_of(trace.begin(), trace.end(), [&](const TraceRecord& t) { return t.units[ru3]; });
  if (r.analyzed.empty()) {
    r.kinematics.degenerate = true;
    r.kinematics.reason = "no complete cycles";
    return r;
  }

  NormalizeOptions opts;
  opts.align_peak_retraction = cfg.align_peak_retraction;
  opts.align_phase_pct = cfg.align_phase_pct;
  r.profile = normalize_average(trace, r.analyzed, opts);
  if (r.profile.n_cycles >= 2) r.jitter = timing_jitter(r.profile);
  r.kinematics = kinematic_checkpoints(r.profile, cfg.rotation_target_deg, cfg.rotation_tolerance_deg);
  r.waves = peristalsis(trace, r.analyzed);
  r.transport_mm = mech::net_transport(column_values(trace, "ingested_mm"), r.analyzed);
  return r;
}

json to_json(const CycleProfile& p) {
  json sig = json::object();
  for (const auto& name : p.order) {
    const auto& s = p.signals.at(name);
    json js = {{"boolean", s.boolean}, {"mean", s.mean}, {"std", s.stddev}};
    if (s.boolean) {
      json cr = json::array();
      for (const auto& c : s.crossings) cr.push_back({{"on", optional_json(c.on)}, {"off", optional_json(c.off)}});
      js["crossings"] = std::move(cr);
    }
    sig[name] = std::move(js);
  }
  return {{"n_cycles", p.n_cycles},
          {"grid_points", kGridPoints},
          {"cycle_lengths_ms", p.cycle_lengths_ms},
          {"shift_points", p.shift_points},
          {"order", p.order},
          {"signals", std::move(sig)}};
}

CycleProfile profile_from_json(const json& j) {
  CycleProfile p;
  p.n_cycles = j.at("n_cycles").get<std::size_t>();
  if (j.at("grid_points").get<std::size_t>() != kGridPoints) throw std::invalid_argument("profile grid size mismatch");
  p.cycle_lengths_ms = j.at("cycle_lengths_ms").get<std::vector<double>>();
  p.shift_points = j.at("shift_points").get<int>();
  p.order = j.at("order").get<std::vector<std::string>>();
  for (const auto& name : p.order) {
    const json& js = j.at("signals").at(name);
    SignalProfile s;
    s.boolean = js.at("boolean").get<bool>();
    s.mean = js.at("mean").get<Grid>();
    s.stddev = js.at("std").get<Grid>();
    if (s.boolean) {
      for (const auto& c : js.at("crossings")) s.crossings.push_back({optional_from(c.at("on")), optional_from(c.at("off"))});
    }
    p.signals[name] = std::move(s);
  }
  return p;
}

json to_json(const JitterReport& r) {
  json sig = json::object();
  for (const auto& [name, e] : r.signals) {
    sig[name] = {{"on", optional_json(e.on)},
                 {"off", optional_json(e.off)},
                 {"on_cycles", e.on_count},
                 {"off_cycles", e.off_count}};
  }
  return {{"signals", std::move(sig)}, {"max_pct", optional_json(r.max_pct)}, {"max_signal", r.max_signal}};
}

json to_json(const KinematicReport& k) {
  return {{"degenerate", k.degenerate},
          {"reason", k.reason},
          {"peak_protraction", {{"pct", k.peak_protraction_pct}, {"x", k.peak_protraction_x}}},
          {"mid_retraction", {{"pct", k.mid_retraction_pct}, {"x", k.mid_retraction_x}}},
          {"peak_retraction", {{"pct", k.peak_retraction_pct}, {"x", k.peak_retraction_x}}},
          {"theta_swing_deg", k.theta_swing_deg},
          {"protraction_swing_deg", k.protraction_swing_deg},
          {"retraction_swing_deg", k.retraction_swing_deg},
          {"theta_peak_pct", k.theta_peak_pct},
          {"theta_x_peak_lag_pct", k.theta_x_peak_lag_pct},
          {"ordering_ok", k.ordering_ok},
          {"rotation_ok", k.rotation_ok}};
}

json to_json(const AnalysisReport& r) {
  json waves = json::array();
  for (const auto& w : r.waves) {
    json onsets = json::array();
    for (const auto& o : w.onset_ms) onsets.push_back(optional_json(o));
    waves.push_back({{"start_ms", w.start_ms},
                     {"duration_ms", w.duration_ms},
                     {"onset_ms", std::move(onsets)},
                     {"ordered", w.ordered},
                     {"distinct", w.distinct}});
  }
  json cycles = json::array();
  for (const auto& c : r.analyzed) cycles.push_back({c.begin, c.end});
  return {{"total_cycles", r.total_cycles},
          {"analyzed_cycles", std::move(cycles)},
          {"jitter", r.jitter ? to_json(*r.jitter) : json(nullptr)},
          {"kinematics", to_json(r.kinematics)},
          {"peristalsis", std::move(waves)},
          {"transport_mm", r.transport_mm},
          {"ru3_fired", r.ru3_fired},
          {"profile", r.analyzed.empty() ? json(nullptr) : to_json(r.profile)}};
}

ProfileDiff compare_profiles(const CycleProfile& a, const CycleProfile& b) {
  ProfileDiff d;
  for (const auto& name : a.order) {
    auto it = b.signals.find(name);
    if (it == b.signals.end()) continue;
    const auto& ma = a.signals.at(name).mean;
    const auto& mb = it->second.mean;
    double worst = 0.0;
    for (std::size_t k = 0; k < kGridPoints; ++k) worst = std::max(worst, std::abs(ma[k] - mb[k]));
    d.max_mean_abs_diff[name] = worst;
    if (d.worst_signal.empty() || worst > d.worst) {
      d.worst = worst;
      d.worst_signal = name;
    }
  }
  return d;
}

}  // namespace slugbot::analysis
