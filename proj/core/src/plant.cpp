#include "slugbot/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slugbot::plant {

namespace {

constexpr std::array<std::string_view, kChannelCount> kRoleNames = {
    "I3Ring1", "I3Ring2", "I3Ring3", "I3Ring4", "I3Ring5",
    "I3Ring6", "I2",      "I1Pair",  "OpenerPair", "Closer"};

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument(field + ": " + why);
}

}  // namespace

std::string_view to_string(ChannelRole r) { return kRoleNames[index(r)]; }

Channels make_channels() {
  Channels chs{};
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    chs[i].id = static_cast<std::uint8_t>(i);
    chs[i].role = static_cast<ChannelRole>(i);
  }
  return chs;
}

RingWeights PlantParams::default_ring_weights() {
  //        RU1  RU2  RU3  B10  B38
  return {{{0.6, 0.0, 0.0, 0.0, 0.4},
           {0.6, 0.2, 0.0, 0.0, 0.2},
           {0.2, 0.6, 0.2, 0.0, 0.0},
           {0.0, 0.8, 0.2, 0.0, 0.0},
           {0.0, 0.2, 0.3, 0.5, 0.0},
           {0.0, 0.0, 0.5, 0.5, 0.0}}};
}

PlantParams PlantParams::defaults() {
  PlantParams p;
  p.tau_activation_ms.fill(150.0);
  p.max_pressure_psig.fill(12.0);
  p.ring_weights = default_ring_weights();
  return p;
}

void PlantParams::validate() const {
  if (!(supply_psig > 0.0)) fail("supply_psig", "must be > 0");
  if (!(band_psig >= 0.0)) fail("band_psig", "must be >= 0");
  if (!(sensor_fullscale_psig >= supply_psig)) fail("sensor_fullscale_psig", "must be >= supply");
  if (!(fill_rate_per_s > 0.0)) fail("fill_rate_per_s", "must be > 0");
  if (!(vent_rate_per_s > 0.0)) fail("vent_rate_per_s", "must be > 0");
  if (!(sensor_noise_psig >= 0.0)) fail("sensor_noise_psig", "must be >= 0");
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    const std::string at = "[" + std::to_string(i) + "]";
    if (!(tau_activation_ms[i] > 0.0)) fail("tau_activation_ms" + at, "must be > 0");
    if (!(max_pressure_psig[i] > 0.0 && max_pressure_psig[i] <= supply_psig)) {
      fail("max_pressure_psig" + at, "must be in (0, supply]");
    }
  }
  for (std::size_t j = 0; j < kRingCount; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k < kRingInputCount; ++k) {
      const double w = ring_weights[j][k];
      if (!(w >= 0.0 && w <= 1.0)) {
        fail("ring_weights[" + std::to_string(j) + "][" + std::to_string(k) + "]", "must be in [0, 1]");
      }
      sum += w;
    }
    if (sum > 1.0 + 1e-12) fail("ring_weights[" + std::to_string(j) + "]", "row sum exceeds 1");
  }
}

double channel_target(const neural::MotorCommands& c, ChannelRole role, const RingWeights& w) {
  const std::size_t i = index(role);
  if (i < kRingCount) {
    const std::array<bool, kRingInputCount> inputs = {c.ru1, c.ru2, c.ru3, c.b10, c.b38};
    double u = 0.0;
    for (std::size_t k = 0; k < kRingInputCount; ++k) {
      if (inputs[k]) u += w[i][k];
    }
    return std::clamp(u, 0.0, 1.0);
  }
  switch (role) {
    case ChannelRole::I2: return c.i2_drive ? 1.0 : 0.0;
    case ChannelRole::I1Pair: return c.b43_b45 ? 1.0 : 0.0;
    case ChannelRole::OpenerPair: return c.opener ? 1.0 : 0.0;
    case ChannelRole::Closer: return c.closer ? 1.0 : 0.0;
    default: return 0.0;
  }
}

void integrate_activation(Channels& channels, const neural::MotorFrame& frame,
                          const PlantParams& params, double dt_ms) {
  if (!(dt_ms > 0.0)) throw std::invalid_argument("integrate_activation: dt must be > 0");
  for (auto& ch : channels) {
    const std::size_t i = index(ch.role);
    const double u = channel_target(frame.commands, ch.role, params.ring_weights);
    const double decay = std::exp(-dt_ms / params.tau_activation_ms[i]);
    ch.activation = std::clamp(u + (ch.activation - u) * decay, 0.0, 1.0);
    ch.setpoint = ch.activation * params.max_pressure_psig[i];
  }
}

ValveStepReport bang_bang_step(ActuatorChannel& ch, double measured_psig, const PlantParams& params,
                               double dt_ms) {
  if (!(dt_ms > 0.0)) throw std::invalid_argument("bang_bang_step: dt must be > 0");
  ValveStepReport report;
  report.measured_psig = measured_psig;

  const double p_max = params.max_pressure_psig[index(ch.role)];
  if (ch.setpoint > p_max) {
    ch.setpoint = p_max;
    report.setpoint_clamped = true;
  }
  ch.setpoint = std::max(ch.setpoint, 0.0);

  const double half_band = 0.5 * params.band_psig;
  ch.inlet_open = measured_psig < ch.setpoint - half_band;
  ch.relief_open = measured_psig > ch.setpoint + half_band;

  const double dt_s = dt_ms * 1e-3;
  if (ch.inlet_open) {
    const double s = params.supply_psig;
    ch.pressure = s + (ch.pressure - s) * std::exp(-params.fill_rate_per_s * dt_s);
  } else if (ch.relief_open) {
    ch.pressure *= std::exp(-params.vent_rate_per_s * dt_s);
  }
  ch.pressure = std::clamp(ch.pressure, 0.0, params.supply_psig);
  return report;
}

ValveStepReport bang_bang_step(ActuatorChannel& ch, const PlantParams& params, double dt_ms,
                               NoiseSource& noise) {
  const double measured = std::clamp(ch.pressure + noise.gaussian(params.sensor_noise_psig), 0.0,
                                     params.sensor_fullscale_psig);
  return bang_bang_step(ch, measured, params, dt_ms);
}

double muscle_tension(const ActuatorChannel& ch, double strain, double max_pressure_psig) {
  const double s = std::clamp(strain, 0.0, 1.0);
  const double p = std::clamp(ch.pressure / max_pressure_psig, 0.0, 1.0);
  return std::clamp(p * (1.0 - s), 0.0, 1.0);
}

PressurePlant::PressurePlant(PlantParams params, std::uint64_t seed)
    : params_(std::move(params)), channels_(make_channels()), noise_(seed, 0x706C616E74ull) {
  params_.validate();
}

void PressurePlant::reset(std::uint64_t seed) {
  channels_ = make_channels();
  noise_.reseed(seed, 0x706C616E74ull);
  clamp_warnings_ = 0;
}

void PressurePlant::step(const neural::MotorFrame& frame, double dt_ms) {
  integrate_activation(channels_, frame, params_, dt_ms);
  for (auto& ch : channels_) {
    if (bang_bang_step(ch, params_, dt_ms, noise_).setpoint_clamped) ++clamp_warnings_;
  }
}

double PressurePlant::tension(ChannelRole role, double strain) const {
  return muscle_tension(channels_[index(role)], strain, params_.max_pressure_psig[index(role)]);
}

}  // namespace slugbot::plant
