#pragma once

namespace sbr {

/// Blend weight of the integrated gyro path; 1 - alpha goes to the
/// accelerometer tilt.
struct FilterConfig {
  double alpha = 0.98;

  void validate() const;
};

struct FilterState {
  double theta_est = 0.0;
};

/// Complementary filter step:
///   theta <- alpha * (theta + gyro * dt) + (1 - alpha) * accel_tilt
FilterState update(const FilterState& state, double gyro, double accel_tilt,
                   double dt, const FilterConfig& cfg);

FilterState reset(double initial_tilt);

}  // namespace sbr
