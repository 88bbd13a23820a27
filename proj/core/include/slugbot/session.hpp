#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "slugbot/config.hpp"
#include "slugbot/simulation.hpp"

namespace slugbot::telemetry {

inline constexpr double kMinSpeed = 0.1;
inline constexpr double kMaxSpeed = 10.0;
inline constexpr int kDefaultDecimation = 20;  // 50 Hz of simulated time at dt = 1 ms

enum class CommandKind { SetStimulus, Start, Pause, Reset, SetSpeed, GetConfig };

struct ClientCommand {
  CommandKind kind = CommandKind::GetConfig;
  nlohmann::json id;  // echoed back verbatim; null when the client sent none
  std::string field;  // SetStimulus
  bool value = false; // SetStimulus
  double speed = 1.0; // SetSpeed
};

/// Malformed or invalid client message. Carries the request id when one could
/// be recovered so the error reply can reference it.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(const std::string& what, nlohmann::json id = nullptr)
      : std::runtime_error(what), id_(std::move(id)) {}
  const nlohmann::json& id() const { return id_; }

 private:
  nlohmann::json id_;
};

/// Parses one line of the wire protocol. Throws ProtocolError.
ClientCommand parse_command(std::string_view line);

nlohmann::json error_reply(const std::string& message, const nlohmann::json& id);

/// Decimated snapshot broadcast to clients.
struct StateFrame {
  std::uint64_t seq = 0;
  std::uint64_t epoch = 0;  // bumped by every reset; timestamps restart at 0
  TraceRecord record;
};

nlohmann::json to_json(const StateFrame& f);

/// Single-threaded core of the live service. Commands apply between ticks, so
/// every frame reflects either none or all of a command.
class LiveSession {
 public:
  explicit LiveSession(SimConfig config, int decimation = kDefaultDecimation);

  /// Applies a command and returns the reply to send to the issuing client.
  nlohmann::json apply(const ClientCommand& cmd);

  /// Advances one tick when running. Returns a frame every `decimation` ticks.
  std::optional<StateFrame> tick();

  bool running() const { return running_; }
  double speed() const { return speed_; }
  double dt_ms() const { return runner_.sim().config().scenario.dt_ms; }
  double now_ms() const { return runner_.sim().now_ms(); }
  std::uint64_t epoch() const { return epoch_; }
  const ScenarioRunner& runner() const { return runner_; }

 private:
  ScenarioRunner runner_;
  int decimation_;
  bool running_ = false;
  double speed_ = 1.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t epoch_ = 0;
};

}  // namespace slugbot::telemetry
