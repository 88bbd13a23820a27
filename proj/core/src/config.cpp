#include "slugbot/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace slugbot {

using nlohmann::json;
using neural::BehaviorMode;
using neural::StimulusState;

namespace {

// Walks one JSON object, tracking the field path for error messages and
// rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) out = as_number(*v, at(key));
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        throw ConfigError(at(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  // Accepts either a scalar (broadcast) or an array of exactly N numbers.
  template <std::size_t N>
  void numbers(const std::string& key, std::array<double, N>& out, bool allow_scalar) {
    const json* v = find(key);
    if (!v) return;
    if (allow_scalar && v->is_number()) {
      out.fill(as_number(*v, at(key)));
      return;
    }
    if (!v->is_array() || v->size() != N) {
      throw ConfigError(at(key), "expected an array of " + std::to_string(N) + " numbers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = as_number((*v)[i], at(key) + "[" + std::to_string(i) + "]");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "must be finite");
    return d;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Re-raises std::invalid_argument from the module validators with a section prefix.
template <typename F>
void validate_section(const std::string& section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    if (colon == std::string::npos) throw ConfigError(section, what);
    throw ConfigError(section + "." + what.substr(0, colon), what.substr(colon + 2));
  }
}

void read_stimulus_fields(ObjectReader& r, StimulusState& s) {
  r.boolean("mech_lips", s.mech_lips);
  r.boolean("chem_lips", s.chem_lips);
  r.boolean("mech_grasper", s.mech_grasper);
  r.boolean("arousal", s.arousal);
}

json stimulus_json(const StimulusState& s) {
  return {{"mech_lips", s.mech_lips},
          {"chem_lips", s.chem_lips},
          {"mech_grasper", s.mech_grasper},
          {"arousal", s.arousal}};
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

neural::BehaviorMap read_behavior_map(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of rules");
  neural::BehaviorMap map;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    ObjectReader r(j[i], at);
    neural::BehaviorRule rule;
    const json* mode = r.find("mode");
    if (!mode || !mode->is_string()) throw ConfigError(r.at("mode"), "expected a mode name");
    auto parsed = neural::parse_mode(mode->get<std::string>());
    if (!parsed) throw ConfigError(r.at("mode"), "unknown mode '" + mode->get<std::string>() + "'");
    rule.mode = *parsed;
    auto opt = [&](const std::string& key, std::optional<bool>& out) {
      bool b = false;
      if (r.find(key)) {
        r.boolean(key, b);
        out = b;
      }
    };
    opt("mech_lips", rule.mech_lips);
    opt("chem_lips", rule.chem_lips);
    opt("mech_grasper", rule.mech_grasper);
    opt("arousal", rule.arousal);
    r.finish();
    map.rules.push_back(rule);
  }
  return map;
}

json behavior_map_json(const neural::BehaviorMap& map) {
  json out = json::array();
  for (const auto& rule : map.rules) {
    json r = {{"mode", lower(neural::to_string(rule.mode))}};
    if (rule.mech_lips) r["mech_lips"] = *rule.mech_lips;
    if (rule.chem_lips) r["chem_lips"] = *rule.chem_lips;
    if (rule.mech_grasper) r["mech_grasper"] = *rule.mech_grasper;
    if (rule.arousal) r["arousal"] = *rule.arousal;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

StimulusState stimulus_for(BehaviorMode mode) {
  switch (mode) {
    case BehaviorMode::Swallow: return {true, true, true, true};
    case BehaviorMode::Bite: return {true, true, false, true};
    case BehaviorMode::Reject: return {false, false, true, true};
    case BehaviorMode::Quiescent: break;
  }
  return {};
}

SimConfig SimConfig::default_swallow() {
  SimConfig c;
  c.scenario.schedule = {{0.0, stimulus_for(BehaviorMode::Swallow)}};
  return c;
}

SimConfig SimConfig::without_noise() const {
  SimConfig c = *this;
  c.plant.sensor_noise_psig = 0.0;
  c.mechanics.sensors.tof_noise_mm = 0.0;
  c.mechanics.sensors.imu_noise_deg = 0.0;
  c.mechanics.sensors.force_noise = 0.0;
  return c;
}

std::size_t SimConfig::tick_count() const {
  return static_cast<std::size_t>(std::llround(scenario.duration_s * 1000.0 / scenario.dt_ms));
}

void SimConfig::validate() const {
  validate_section("neural", [&] { neural.validate(); });
  validate_section("plant", [&] { plant.validate(); });
  validate_section("mechanics", [&] { mechanics.validate(); });

  const auto& s = scenario;
  if (!(s.dt_ms > 0.0)) throw ConfigError("scenario.dt_ms", "must be > 0");
  if (!(s.duration_s > 0.0)) throw ConfigError("scenario.duration_s", "must be > 0");
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    const std::string at = "scenario.schedule[" + std::to_string(i) + "].t_s";
    if (!(s.schedule[i].t_s >= 0.0)) throw ConfigError(at, "must be >= 0");
    if (i > 0 && s.schedule[i].t_s < s.schedule[i - 1].t_s) throw ConfigError(at, "must be sorted by time");
  }

  const auto& a = analysis;
  if (a.warmup_cycles < 0) throw ConfigError("analysis.warmup_cycles", "must be >= 0");
  if (a.cycles < 1) throw ConfigError("analysis.cycles", "must be >= 1");
  if (!(a.align_phase_pct >= 0.0 && a.align_phase_pct <= 100.0)) {
    throw ConfigError("analysis.align_phase_pct", "must be in [0, 100]");
  }
  if (!(a.rotation_tolerance_deg >= 0.0)) throw ConfigError("analysis.rotation_tolerance_deg", "must be >= 0");
  if (!(a.jitter_bound_pct >= 0.0)) throw ConfigError("analysis.jitter_bound_pct", "must be >= 0");
}

SimConfig config_from_json(const json& j) {
  SimConfig c;
  ObjectReader root(j, "");

  if (const json* v = root.find("neural")) {
    ObjectReader r(*v, "neural");
    auto& n = c.neural;
    r.number("ru2_delay_ms", n.ru2_delay_ms);
    r.number("ru3_delay_ms", n.ru3_delay_ms);
    r.number("b10_delay_ms", n.b10_delay_ms);
    r.number("protraction_max_ms", n.protraction_max_ms);
    r.number("retraction_max_ms", n.retraction_max_ms);
    r.number("protraction_threshold", n.protraction_threshold);
    r.number("retraction_threshold", n.retraction_threshold);
    if (const json* m = r.find("behavior_map")) c.behavior_map = read_behavior_map(*m, r.at("behavior_map"));
    r.finish();
  }

  if (const json* v = root.find("plant")) {
    ObjectReader r(*v, "plant");
    auto& p = c.plant;
    r.number("supply_psig", p.supply_psig);
    r.number("band_psig", p.band_psig);
    r.number("sensor_fullscale_psig", p.sensor_fullscale_psig);
    r.number("fill_rate_per_s", p.fill_rate_per_s);
    r.number("vent_rate_per_s", p.vent_rate_per_s);
    r.number("sensor_noise_psig", p.sensor_noise_psig);
    r.numbers("tau_activation_ms", p.tau_activation_ms, true);
    r.numbers("max_pressure_psig", p.max_pressure_psig, true);
    if (const json* w = r.find("ring_weights")) {
      const std::string at = r.at("ring_weights");
      if (!w->is_array() || w->size() != plant::kRingCount) {
        throw ConfigError(at, "expected " + std::to_string(plant::kRingCount) + " rows");
      }
      for (std::size_t row = 0; row < plant::kRingCount; ++row) {
        const json& jr = (*w)[row];
        const std::string rat = at + "[" + std::to_string(row) + "]";
        if (!jr.is_array() || jr.size() != plant::kRingInputCount) {
          throw ConfigError(rat, "expected " + std::to_string(plant::kRingInputCount) + " weights");
        }
        for (std::size_t k = 0; k < plant::kRingInputCount; ++k) {
          p.ring_weights[row][k] = ObjectReader::as_number(jr[k], rat + "[" + std::to_string(k) + "]");
        }
      }
    }
    r.finish();
  }

  if (const json* v = root.find("mechanics")) {
    ObjectReader r(*v, "mechanics");
    auto& m = c.mechanics;
    r.number("damping", m.damping);
    r.number("hinge_stiffness", m.hinge_stiffness);
    r.number("gain_i2", m.gain_i2);
    r.number("gain_i3", m.gain_i3);
    r.number("gain_i1", m.gain_i1);
    r.number("rotation_lag_ms", m.rotation_lag_ms);
    r.number("stroke_mm", m.stroke_mm);
    r.number("close_threshold", m.close_threshold);
    r.number("ring_sigma", m.ring_sigma);
    r.numbers("ring_positions", m.ring_positions, false);
    r.numbers("ring_direction", m.ring_direction, true);
    if (const json* sv = r.find("sensors")) {
      ObjectReader sr(*sv, r.at("sensors"));
      sr.number("tof_zero_mm", m.sensors.tof_zero_mm);
      sr.number("tof_quantum_mm", m.sensors.tof_quantum_mm);
      sr.number("tof_noise_mm", m.sensors.tof_noise_mm);
      sr.number("imu_noise_deg", m.sensors.imu_noise_deg);
      sr.number("force_noise", m.sensors.force_noise);
      sr.finish();
    }
    r.finish();
  }

  if (const json* v = root.find("scenario")) {
    ObjectReader r(*v, "scenario");
    auto& s = c.scenario;
    r.number("duration_s", s.duration_s);
    r.number("dt_ms", s.dt_ms);
    r.unsigned64("seed", s.seed);
    r.boolean("externally_held", s.externally_held);
    if (const json* sched = r.find("schedule")) {
      const std::string at = r.at("schedule");
      if (!sched->is_array()) throw ConfigError(at, "expected an array");
      s.schedule.clear();
      for (std::size_t i = 0; i < sched->size(); ++i) {
        ObjectReader er((*sched)[i], at + "[" + std::to_string(i) + "]");
        StimulusEvent ev;
        er.number("t_s", ev.t_s);
        if (const json* mode = er.find("mode")) {
          if (!mode->is_string()) throw ConfigError(er.at("mode"), "expected a mode name");
          auto parsed = neural::parse_mode(mode->get<std::string>());
          if (!parsed) throw ConfigError(er.at("mode"), "unknown mode '" + mode->get<std::string>() + "'");
          ev.stimulus = stimulus_for(*parsed);
        }
        read_stimulus_fields(er, ev.stimulus);
        er.finish();
        s.schedule.push_back(ev);
      }
    }
    r.finish();
  }

  if (const json* v = root.find("analysis")) {
    ObjectReader r(*v, "analysis");
    auto& a = c.analysis;
    r.integer("warmup_cycles", a.warmup_cycles);
    r.integer("cycles", a.cycles);
    r.boolean("align_peak_retraction", a.align_peak_retraction);
    r.number("align_phase_pct", a.align_phase_pct);
    r.number("rotation_target_deg", a.rotation_target_deg);
    r.number("rotation_tolerance_deg", a.rotation_tolerance_deg);
    r.number("jitter_bound_pct", a.jitter_bound_pct);
    r.finish();
  }

  root.finish();
  c.validate();
  return c;
}

json config_to_json(const SimConfig& c) {
  json j;
  const auto& n = c.neural;
  j["neural"] = {{"ru2_delay_ms", n.ru2_delay_ms},
                 {"ru3_delay_ms", n.ru3_delay_ms},
                 {"b10_delay_ms", n.b10_delay_ms},
                 {"protraction_max_ms", n.protraction_max_ms},
                 {"retraction_max_ms", n.retraction_max_ms},
                 {"protraction_threshold", n.protraction_threshold},
                 {"retraction_threshold", n.retraction_threshold},
                 {"behavior_map", behavior_map_json(c.behavior_map)}};

  const auto& p = c.plant;
  j["plant"] = {{"supply_psig", p.supply_psig},
                {"band_psig", p.band_psig},
                {"sensor_fullscale_psig", p.sensor_fullscale_psig},
                {"fill_rate_per_s", p.fill_rate_per_s},
                {"vent_rate_per_s", p.vent_rate_per_s},
                {"sensor_noise_psig", p.sensor_noise_psig},
                {"tau_activation_ms", p.tau_activation_ms},
                {"max_pressure_psig", p.max_pressure_psig},
                {"ring_weights", p.ring_weights}};

  const auto& m = c.mechanics;
  j["mechanics"] = {{"damping", m.damping},
                    {"hinge_stiffness", m.hinge_stiffness},
                    {"gain_i2", m.gain_i2},
                    {"gain_i3", m.gain_i3},
                    {"gain_i1", m.gain_i1},
                    {"rotation_lag_ms", m.rotation_lag_ms},
                    {"stroke_mm", m.stroke_mm},
                    {"close_threshold", m.close_threshold},
                    {"ring_sigma", m.ring_sigma},
                    {"ring_positions", m.ring_positions},
                    {"ring_direction", m.ring_direction},
                    {"sensors",
                     {{"tof_zero_mm", m.sensors.tof_zero_mm},
                      {"tof_quantum_mm", m.sensors.tof_quantum_mm},
                      {"tof_noise_mm", m.sensors.tof_noise_mm},
                      {"imu_noise_deg", m.sensors.imu_noise_deg},
                      {"force_noise", m.sensors.force_noise}}}};

  const auto& s = c.scenario;
  json sched = json::array();
  for (const auto& ev : s.schedule) {
    json e = stimulus_json(ev.stimulus);
    e["t_s"] = ev.t_s;
    sched.push_back(std::move(e));
  }
  j["scenario"] = {{"duration_s", s.duration_s},
                   {"dt_ms", s.dt_ms},
                   {"seed", s.seed},
                   {"externally_held", s.externally_held},
                   {"schedule", std::move(sched)}};

  const auto& a = c.analysis;
  j["analysis"] = {{"warmup_cycles", a.warmup_cycles},
                   {"cycles", a.cycles},
                   {"align_peak_retraction", a.align_peak_retraction},
                   {"align_phase_pct", a.align_phase_pct},
                   {"rotation_target_deg", a.rotation_target_deg},
                   {"rotation_tolerance_deg", a.rotation_tolerance_deg},
                   {"jitter_bound_pct", a.jitter_bound_pct}};
  return j;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace slugbot
