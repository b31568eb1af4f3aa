#pragma once

// MPU6050-style IMU emulation in the balance plane.

#include <cstdint>
#include <numbers>
#include <random>

#include "sbr/plant.hpp"

namespace sbr {

inline constexpr double kStandardGravity = 9.81;

struct ImuConfig {
  double accel_noise_std = 0.2;       // m/s^2 per axis
  double gyro_noise_std = 0.005;      // rad/s
  double gyro_bias_init = 0.01;       // rad/s
  double gyro_bias_walk_std = 0.001;  // rad/s per sqrt(s)
  double accel_range = 4.0 * kStandardGravity;         // +-4 g
  double gyro_range = 250.0 * std::numbers::pi / 180.0;  // +-250 deg/s
  double sample_rate = 100.0;                          // Hz

  void validate() const;

  /// Same ranges and rate with every noise and bias term zeroed.
  ImuConfig noiseless() const;
};

/// One reading. accel_x/accel_z are specific force along the body axes;
/// the x axis is signed so that a static body tilted by theta reads
/// atan2(accel_x, accel_z) = theta.
struct ImuSample {
  double accel_x = 0.0;
  double accel_z = 0.0;
  double gyro = 0.0;
  double t = 0.0;

  bool operator==(const ImuSample&) const = default;
};

struct ImuState {
  double gyro_bias = 0.0;
  std::mt19937_64 rng;

  static ImuState seeded(std::uint64_t seed, const ImuConfig& cfg);
};

/// Ideal (noise-free, unclipped) specific force in the body frame for a body
/// at tilt theta whose axle accelerates at cart_accel along x.
struct SpecificForce {
  double x;
  double z;
};
SpecificForce body_specific_force(double theta, double cart_accel, double gravity);

/// Produces one reading and advances the bias random walk. `gravity` is the
/// plant's g; dt is the sampling interval.
ImuSample sample(const StateVector& true_state, double true_cart_accel, double t,
                 ImuState& imu, const ImuConfig& cfg, double dt,
                 double gravity = kStandardGravity);

/// Tilt implied by the gravity direction. Throws std::domain_error for the
/// zero vector (free fall).
double accel_tilt(const ImuSample& s);

}  // namespace sbr
