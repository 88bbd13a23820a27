#include "slugbot/mechanics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slugbot::mech {

using plant::ChannelRole;

void MechParams::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(damping > 0.0)) fail("damping", "must be > 0");
  if (!(hinge_stiffness > 0.0)) fail("hinge_stiffness", "must be > 0");
  if (!(gain_i2 > 0.0)) fail("gain_i2", "must be > 0");
  if (!(gain_i3 > 0.0)) fail("gain_i3", "must be > 0");
  if (!(gain_i1 >= 0.0)) fail("gain_i1", "must be >= 0");
  if (!(rotation_lag_ms >= 0.0)) fail("rotation_lag_ms", "must be >= 0");
  if (!(stroke_mm > 0.0)) fail("stroke_mm", "must be > 0");
  if (!(close_threshold > 0.0 && close_threshold < 1.0)) fail("close_threshold", "must be in (0, 1)");
  if (!(ring_sigma > 0.0)) fail("ring_sigma", "must be > 0");
  for (std::size_t j = 0; j < ring_positions.size(); ++j) {
    if (!(ring_positions[j] >= 0.0 && ring_positions[j] <= 1.0)) {
      fail("ring_positions[" + std::to_string(j) + "]", "must be in [0, 1]");
    }
  }
  if (!(sensors.tof_quantum_mm >= 0.0)) fail("sensors.tof_quantum_mm", "must be >= 0");
  if (!(sensors.tof_noise_mm >= 0.0)) fail("sensors.tof_noise_mm", "must be >= 0");
  if (!(sensors.imu_noise_deg >= 0.0)) fail("sensors.imu_noise_deg", "must be >= 0");
  if (!(sensors.force_noise >= 0.0)) fail("sensors.force_noise", "must be >= 0");
}

Tensions tensions_from(const plant::Channels& channels, const plant::PlantParams& params) {
  auto tension = [&](ChannelRole role) {
    const auto i = plant::index(role);
    return plant::muscle_tension(channels[i], 0.0, params.max_pressure_psig[i]);
  };
  Tensions t;
  for (std::size_t j = 0; j < plant::kRingCount; ++j) {
    t.rings[j] = tension(static_cast<ChannelRole>(j));
  }
  t.i2 = tension(ChannelRole::I2);
  t.i1 = tension(ChannelRole::I1Pair);
  t.opener = tension(ChannelRole::OpenerPair);
  t.closer = tension(ChannelRole::Closer);
  return t;
}

double ring_engagement(double x, double ring_x, double sigma) {
  const double u = (x - ring_x) / sigma;
  return std::exp(-0.5 * u * u);
}

void transport(FoodObject& food, double closure, double dx, const MechParams& params) {
  food.grasped = closure >= params.close_threshold;
  if (!food.grasped) return;
  const double travel_mm = -dx * params.stroke_mm;
  if (travel_mm > 0.0) {
    food.position_mm += travel_mm;
    food.ingested_mm += travel_mm;
  } else if (!food.externally_held) {
    food.position_mm += travel_mm;
  }
}

MechStep step_mechanics(const GrasperState& g, const Tensions& t, const FoodObject& food,
                        const MechParams& params, double dt_ms) {
  if (!(dt_ms > 0.0)) throw std::invalid_argument("step_mechanics: dt must be > 0");
  const double dt_s = dt_ms * 1e-3;

  // Ring squeeze is evaluated at the start of the step and held constant, which
  // leaves dx/dt = a - b*x with an exact exponential solution.
  double ring_push = 0.0;
  for (std::size_t j = 0; j < plant::kRingCount; ++j) {
    ring_push += t.rings[j] * ring_engagement(g.x, params.ring_positions[j], params.ring_sigma) *
                 params.ring_direction[j];
  }
  const double c = params.damping;
  const double a = c * (params.gain_i2 * t.i2 - params.gain_i3 * ring_push - params.gain_i1 * t.i1);
  const double b = c * (params.gain_i2 * t.i2 + params.hinge_stiffness);
  const double x_eq = a / b;
  const double x_next = std::clamp(x_eq + (g.x - x_eq) * std::exp(-b * dt_s), 0.0, 1.0);

  MechStep out{g, food};
  out.grasper.x = x_next;

  const double theta_target = kMaxRotationDeg * x_next;
  if (params.rotation_lag_ms <= 0.0) {
    out.grasper.theta_deg = theta_target;
  } else {
    out.grasper.theta_deg =
        theta_target + (g.theta_deg - theta_target) * std::exp(-dt_ms / params.rotation_lag_ms);
  }
  out.grasper.theta_deg = std::clamp(out.grasper.theta_deg, 0.0, kMaxRotationDeg);

  out.grasper.closure = std::clamp(t.closer - t.opener, 0.0, 1.0);
  out.grasper.aperture = 1.0 - out.grasper.closure;

  transport(out.food, out.grasper.closure, x_next - g.x, params);
  return out;
}

MechStep step_mechanics(const GrasperState& g, const plant::Channels& channels,
                        const plant::PlantParams& plant_params, const FoodObject& food,
                        const MechParams& params, double dt_ms) {
  return step_mechanics(g, tensions_from(channels, plant_params), food, params, dt_ms);
}

double x_hat_from_tof(double tof_distance_mm, const MechParams& params) {
  return std::clamp((params.sensors.tof_zero_mm - tof_distance_mm) / params.stroke_mm, 0.0, 1.0);
}

SensorReadings sense(const GrasperState& g, const MechParams& params, NoiseSource& noise) {
  const auto& s = params.sensors;
  SensorReadings r;
  double tof = s.tof_zero_mm - g.x * params.stroke_mm + noise.gaussian(s.tof_noise_mm);
  if (s.tof_quantum_mm > 0.0) tof = std::round(tof / s.tof_quantum_mm) * s.tof_quantum_mm;
  r.tof_distance_mm = tof;
  r.imu_angle_deg = g.theta_deg + noise.gaussian(s.imu_noise_deg);
  r.force_reading = std::clamp(g.closure + noise.gaussian(s.force_noise), 0.0, 1.0);
  r.x_hat = x_hat_from_tof(tof, params);
  return r;
}

SensorReadings sense(const GrasperState& g, const MechParams& params, std::uint64_t seed) {
  NoiseSource noise(seed, 0x73656E7365ull);
  return sense(g, params, noise);
}

std::vector<double> net_transport(std::span<const double> ingested_mm,
                                  std::span<const CycleBounds> cycles) {
  std::vector<double> out;
  out.reserve(cycles.size());
  for (const auto& c : cycles) {
    if (c.begin >= ingested_mm.size() || c.end > ingested_mm.size() || c.end <= c.begin) {
      throw std::out_of_range("net_transport: cycle bounds outside trace");
    }
    // The cycle's last sample is end - 1; the gain across the boundary tick
    // belongs to the next cycle.
    const double start = c.begin == 0 ? 0.0 : ingested_mm[c.begin - 1];
    out.push_back(ingested_mm[c.end - 1] - start);
  }
  return out;
}

}  // namespace slugbot::mech
