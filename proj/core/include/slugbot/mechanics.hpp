#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "slugbot/neural.hpp"
#include "slugbot/noise.hpp"
#include "slugbot/plant.hpp"

namespace slugbot::mech {

inline constexpr double kMaxRotationDeg = 90.0;

struct GrasperState {
  double x = 0.0;         // 0 = fully retracted (posterior), 1 = peak protraction
  double theta_deg = 0.0; // [0, 90]
  double closure = 0.0;
  double aperture = 1.0;

  friend bool operator==(const GrasperState&, const GrasperState&) = default;
};

struct FoodObject {
  double position_mm = 0.0;  // along the tract axis, positive inward
  bool grasped = false;
  double ingested_mm = 0.0;
  bool externally_held = true;

  friend bool operator==(const FoodObject&, const FoodObject&) = default;
};

struct SensorParams {
  double tof_zero_mm = 150.0;
  double tof_quantum_mm = 1.0;
  double tof_noise_mm = 1.0;
  double imu_noise_deg = 0.5;
  double force_noise = 0.01;
};

struct MechParams {
  double damping = 1.0;          // c, 1/s
  double hinge_stiffness = 0.1;  // k_hinge
  double gain_i2 = 40.0;
  double gain_i3 = 1.0;
  double gain_i1 = 3.0;
  double rotation_lag_ms = 5.0;  // 0 makes theta follow 90*x exactly
  double stroke_mm = 100.0;
  double close_threshold = 0.5;
  double ring_sigma = 0.25;
  /// Ring centers, anterior (ring 1) to posterior (ring 6), in x units.
  std::array<double, plant::kRingCount> ring_positions{0.9, 0.74, 0.58, 0.42, 0.26, 0.1};
  /// +1: squeeze pushes the odontophore posterior; -1: anterior.
  std::array<double, plant::kRingCount> ring_direction{1, 1, 1, 1, 1, 1};
  SensorParams sensors;

  void validate() const;
};

/// Muscle tensions consumed by the mechanics, each in [0, 1].
struct Tensions {
  std::array<double, plant::kRingCount> rings{};
  double i2 = 0.0;
  double i1 = 0.0;
  double opener = 0.0;
  double closer = 0.0;
};

Tensions tensions_from(const plant::Channels& channels, const plant::PlantParams& params);

/// Gaussian engagement of a ring with the odontophore at x.
double ring_engagement(double x, double ring_x, double sigma);

/// Applies the grasp/transport rule for a translation increment dx.
void transport(FoodObject& food, double closure, double dx, const MechParams& params);

struct MechStep {
  GrasperState grasper;
  FoodObject food;
};

/// Overdamped translation, lagged rotation, closure and object transport.
/// Throws std::invalid_argument when dt_ms <= 0.
MechStep step_mechanics(const GrasperState& g, const Tensions& t, const FoodObject& food,
                        const MechParams& params, double dt_ms);
MechStep step_mechanics(const GrasperState& g, const plant::Channels& channels,
                        const plant::PlantParams& plant_params, const FoodObject& food,
                        const MechParams& params, double dt_ms);

struct SensorReadings {
  double tof_distance_mm = 0.0;
  double imu_angle_deg = 0.0;
  double force_reading = 0.0;
  double x_hat = 0.0;

  neural::ProprioFeedback proprio() const { return {x_hat, force_reading}; }
  friend bool operator==(const SensorReadings&, const SensorReadings&) = default;
};

SensorReadings sense(const GrasperState& g, const MechParams& params, NoiseSource& noise);
SensorReadings sense(const GrasperState& g, const MechParams& params, std::uint64_t seed);

double x_hat_from_tof(double tof_distance_mm, const MechParams& params);

/// Half-open tick interval [begin, end) of one cycle.
struct CycleBounds {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Ingested length gained over each cycle.
std::vector<double> net_transport(std::span<const double> ingested_mm,
                                  std::span<const CycleBounds> cycles);

}  // namespace slugbot::mech
