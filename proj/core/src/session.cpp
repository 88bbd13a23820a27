#include "slugbot/session.hpp"

namespace slugbot::telemetry {

using nlohmann::json;

namespace {

bool* stimulus_field(neural::StimulusState& s, std::string_view name) {
  if (name == "mech_lips") return &s.mech_lips;
  if (name == "chem_lips") return &s.chem_lips;
  if (name == "mech_grasper") return &s.mech_grasper;
  if (name == "arousal") return &s.arousal;
  return nullptr;
}

json stimulus_json(const neural::StimulusState& s) {
  return {{"mech_lips", s.mech_lips},
          {"chem_lips", s.chem_lips},
          {"mech_grasper", s.mech_grasper},
          {"arousal", s.arousal}};
}

}  // namespace

ClientCommand parse_command(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("malformed JSON");
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");

  ClientCommand c;
  if (auto it = j.find("id"); it != j.end()) c.id = *it;
  auto cmd = j.find("cmd");
  if (cmd == j.end() || !cmd->is_string()) throw ProtocolError("missing \"cmd\"", c.id);
  const auto name = cmd->get<std::string>();

  if (name == "set_stimulus") {
    c.kind = CommandKind::SetStimulus;
    auto field = j.find("field");
    auto value = j.find("value");
    if (field == j.end() || !field->is_string()) throw ProtocolError("set_stimulus needs \"field\"", c.id);
    if (value == j.end() || !value->is_boolean()) throw ProtocolError("set_stimulus needs boolean \"value\"", c.id);
    c.field = field->get<std::string>();
    neural::StimulusState probe;
    if (!stimulus_field(probe, c.field)) throw ProtocolError("unknown stimulus field '" + c.field + "'", c.id);
    c.value = value->get<bool>();
  } else if (name == "start") {
    c.kind = CommandKind::Start;
  } else if (name == "pause") {
    c.kind = CommandKind::Pause;
  } else if (name == "reset") {
    c.kind = CommandKind::Reset;
  } else if (name == "set_speed") {
    c.kind = CommandKind::SetSpeed;
    auto value = j.find("value");
    if (value == j.end() || !value->is_number()) throw ProtocolError("set_speed needs numeric \"value\"", c.id);
    c.speed = value->get<double>();
    if (!(c.speed >= kMinSpeed && c.speed <= kMaxSpeed)) {
      throw ProtocolError("speed must be in [0.1, 10]", c.id);
    }
  } else if (name == "get_config") {
    c.kind = CommandKind::GetConfig;
  } else {
    throw ProtocolError("unknown command '" + name + "'", c.id);
  }
  return c;
}

json error_reply(const std::string& message, const json& id) { return {{"err", message}, {"id", id}}; }

json to_json(const StateFrame& f) {
  const auto& r = f.record;
  json units = json::object();
  for (std::size_t u = 0; u < neural::kUnitCount; ++u) {
    units[std::string(neural::to_string(static_cast<neural::Unit>(u)))] = r.units[u];
  }
  json channels = json::array();
  for (const auto& ch : r.channels) {
    channels.push_back({{"role", plant::to_string(ch.role)}, {"setpoint", ch.setpoint}, {"pressure", ch.pressure}});
  }
  return {{"frame",
           {{"seq", f.seq},
            {"epoch", f.epoch},
            {"t_ms", r.t_ms},
            {"stimulus", stimulus_json(r.stimulus)},
            {"mode", neural::to_string(r.mode)},
            {"phase", neural::to_string(r.phase)},
            {"units", std::move(units)},
            {"channels", std::move(channels)},
            {"x", r.grasper.x},
            {"theta_deg", r.grasper.theta_deg},
            {"closure", r.grasper.closure},
            {"ingested_mm", r.food.ingested_mm}}}};
}

LiveSession::LiveSession(SimConfig config, int decimation)
    : runner_(std::move(config)), decimation_(decimation) {
  if (decimation_ < 1) throw std::invalid_argument("decimation must be >= 1");
}

json LiveSession::apply(const ClientCommand& cmd) {
  json reply = {{"ok", true}, {"id", cmd.id}, {"t_ms", now_ms()}, {"epoch", epoch_}};
  switch (cmd.kind) {
    case CommandKind::SetStimulus: {
      auto s = runner_.sim().stimulus();
      *stimulus_field(s, cmd.field) = cmd.value;
      runner_.sim().set_stimulus(s);
      reply["stimulus"] = stimulus_json(s);
      reply["mode"] = neural::to_string(classify_behavior(s, runner_.sim().config().behavior_map));
      break;
    }
    case CommandKind::Start: running_ = true; break;
    case CommandKind::Pause: running_ = false; break;
    case CommandKind::Reset:
      runner_.reset();
      ++epoch_;
      reply["epoch"] = epoch_;
      reply["t_ms"] = now_ms();
      break;
    case CommandKind::SetSpeed: speed_ = cmd.speed; break;
    case CommandKind::GetConfig:
      reply["config"] = config_to_json(runner_.sim().config());
      reply["decimation"] = decimation_;
      break;
  }
  reply["running"] = running_;
  reply["speed"] = speed_;
  return reply;
}

std::optional<StateFrame> LiveSession::tick() {
  if (!running_) return std::nullopt;
  TraceRecord r = runner_.step();
  if (runner_.sim().tick() % static_cast<std::uint64_t>(decimation_) != 0) return std::nullopt;
  return StateFrame{next_seq_++, epoch_, std::move(r)};
}

}  // namespace slugbot::telemetry
