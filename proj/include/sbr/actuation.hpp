#pragma once

#include "sbr/plant.hpp"

namespace sbr {

inline constexpr double kKgfCmToNm = 0.0980665;

/// NEMA 17 class stepper driving one wheel. The stepper is treated as a
/// rate-commanded velocity source whose torque is capped at holding torque.
struct MotorParams {
  int steps_per_rev = 200;                    // 1.8 deg full steps
  double max_step_rate = 4000.0;              // steps/s
  double holding_torque = 3.2 * kKgfCmToNm;   // N m, 3.2 kg-cm
  double wheel_radius = 0.030;                // m, kept equal to RobotParams
  double speed_tracking_gain = 50.0;          // k_v [1/s]
  double track_width = 0.15;                  // m, wheel-to-wheel distance
  // Load inertia seen by each wheel, half the robot mass reflected through
  // the wheel radius: (M + m) r^2 / 2.
  double reflected_inertia = 0.5 * (0.6 + 0.4) * 0.030 * 0.030;

  void validate() const;

  /// Wheel speed at full duty [rad/s].
  double max_wheel_speed() const;

  /// Derives wheel_radius and reflected_inertia from the robot.
  MotorParams matched_to(const RobotParams& robot) const;
};

/// Normalized per-wheel duty; sign is direction.
struct DutyCommand {
  double left = 0.0;
  double right = 0.0;

  /// Both components clamped to [-1, 1]; NaN maps to 0.
  static DutyCommand clamped(double left, double right);

  bool operator==(const DutyCommand&) const = default;
};

struct MotorState {
  double wheel_speed_left = 0.0;   // rad/s
  double wheel_speed_right = 0.0;  // rad/s

  double average() const { return 0.5 * (wheel_speed_left + wheel_speed_right); }
};

struct ActuationResult {
  MotorState motor;
  double force_on_cart = 0.0;  // N along +x
  double yaw_rate = 0.0;       // rad/s, positive when the right wheel is faster
};

double duty_to_step_rate(double duty, const MotorParams& params);
double step_rate_to_wheel_speed(double rate, const MotorParams& params);

/// Advances both wheels one control period toward their commanded speeds.
/// The wheels' common speed is re-synchronized to the cart's rolling speed
/// first (no slip); the differential part is carried in motor_state.
ActuationResult actuate(const DutyCommand& command, const MotorState& motor_state,
                        const StateVector& plant_state, double dt,
                        const MotorParams& params);

}  // namespace sbr
