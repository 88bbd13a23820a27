#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "slugbot/neural.hpp"
#include "slugbot/noise.hpp"

namespace slugbot::plant {

inline constexpr std::size_t kChannelCount = 10;
inline constexpr std::size_t kRingCount = 6;
/// Innervation columns of the I3 weight matrix.
inline constexpr std::size_t kRingInputCount = 5;  // RU1, RU2, RU3, B10, B38

enum class ChannelRole : std::uint8_t {
  I3Ring1,
  I3Ring2,
  I3Ring3,
  I3Ring4,
  I3Ring5,
  I3Ring6,
  I2,
  I1Pair,
  OpenerPair,
  Closer,
};

constexpr std::size_t index(ChannelRole r) { return static_cast<std::size_t>(r); }
std::string_view to_string(ChannelRole r);

struct ActuatorChannel {
  std::uint8_t id = 0;
  ChannelRole role = ChannelRole::I3Ring1;
  double activation = 0.0;  // [0, 1]
  double setpoint = 0.0;    // psig
  double pressure = 0.0;    // psig
  bool inlet_open = false;
  bool relief_open = false;

  friend bool operator==(const ActuatorChannel&, const ActuatorChannel&) = default;
};

using Channels = std::array<ActuatorChannel, kChannelCount>;
using RingWeights = std::array<std::array<double, kRingInputCount>, kRingCount>;

Channels make_channels();

struct PlantParams {
  double supply_psig = 15.0;
  double band_psig = 0.4;  // total width, centered on the setpoint
  double sensor_fullscale_psig = 30.0;
  double fill_rate_per_s = 8.0;
  double vent_rate_per_s = 6.0;
  double sensor_noise_psig = 0.05;
  std::array<double, kChannelCount> tau_activation_ms{};
  std::array<double, kChannelCount> max_pressure_psig{};
  RingWeights ring_weights{};

  static PlantParams defaults();
  static RingWeights default_ring_weights();

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Target activation for a channel under the given motor commands.
double channel_target(const neural::MotorCommands& c, ChannelRole role, const RingWeights& w);

/// First-order activation update toward each channel's target; setpoint
/// follows as activation times the role's max pressure.
void integrate_activation(Channels& channels, const neural::MotorFrame& frame,
                          const PlantParams& params, double dt_ms);

struct ValveStepReport {
  double measured_psig = 0.0;
  bool setpoint_clamped = false;
};

/// One bang-bang control step on an already-measured pressure, followed by the
/// exact exponential pressure update for the chosen valve state.
ValveStepReport bang_bang_step(ActuatorChannel& ch, double measured_psig, const PlantParams& params,
                               double dt_ms);

/// Samples the pressure sensor (gaussian noise, clamped to the sensor range)
/// and runs bang_bang_step.
ValveStepReport bang_bang_step(ActuatorChannel& ch, const PlantParams& params, double dt_ms,
                               NoiseSource& noise);

/// Normalized McKibben tension: (pressure / max_pressure) * (1 - strain), in [0, 1].
double muscle_tension(const ActuatorChannel& ch, double strain, double max_pressure_psig);

/// The ten-channel pressure controller with its sensor noise stream.
class PressurePlant {
 public:
  PressurePlant(PlantParams params, std::uint64_t seed);

  void reset(std::uint64_t seed);
  void step(const neural::MotorFrame& frame, double dt_ms);

  const Channels& channels() const { return channels_; }
  const PlantParams& params() const { return params_; }
  std::uint64_t clamp_warnings() const { return clamp_warnings_; }
  double tension(ChannelRole role, double strain = 0.0) const;

 private:
  PlantParams params_;
  Channels channels_;
  NoiseSource noise_;
  std::uint64_t clamp_warnings_ = 0;
};

}  // namespace slugbot::plant
