#include "sbr/actuation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sbr {

namespace {

double clamp_unit(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, -1.0, 1.0);
}

struct WheelUpdate {
  double speed;
  double torque;
};

WheelUpdate drive_wheel(double duty, double actual_speed, double dt,
                        const MotorParams& p) {
  const double target = step_rate_to_wheel_speed(duty_to_step_rate(duty, p), p);
  const double demand =
      p.reflected_inertia * p.speed_tracking_gain * (target - actual_speed);
  const double torque = std::clamp(demand, -p.holding_torque, p.holding_torque);
  const double limit = p.max_wheel_speed();
  const double speed = std::clamp(
      actual_speed + torque / p.reflected_inertia * dt, -limit, limit);
  return {speed, torque};
}

}  // namespace

void MotorParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (steps_per_rev <= 0) throw std::invalid_argument("MotorParams: steps_per_rev must be > 0");
  if (!positive(max_step_rate)) throw std::invalid_argument("MotorParams: max_step_rate must be > 0");
  if (!positive(holding_torque)) throw std::invalid_argument("MotorParams: holding_torque must be > 0");
  if (!positive(wheel_radius)) throw std::invalid_argument("MotorParams: wheel_radius must be > 0");
  if (!positive(speed_tracking_gain))
    throw std::invalid_argument("MotorParams: speed_tracking_gain must be > 0");
  if (!positive(track_width)) throw std::invalid_argument("MotorParams: track_width must be > 0");
  if (!positive(reflected_inertia))
    throw std::invalid_argument("MotorParams: reflected_inertia must be > 0");
}

double MotorParams::max_wheel_speed() const {
  return step_rate_to_wheel_speed(max_step_rate, *this);
}

MotorParams MotorParams::matched_to(const RobotParams& robot) const {
  MotorParams p = *this;
  p.wheel_radius = robot.wheel_radius;
  p.reflected_inertia = 0.5 * (robot.cart_mass + robot.pendulum_mass) *
                        robot.wheel_radius * robot.wheel_radius;
  return p;
}

DutyCommand DutyCommand::clamped(double left, double right) {
  return {clamp_unit(left), clamp_unit(right)};
}

double duty_to_step_rate(double duty, const MotorParams& params) {
  return clamp_unit(duty) * params.max_step_rate;
}

double step_rate_to_wheel_speed(double rate, const MotorParams& params) {
  return rate * 2.0 * std::numbers::pi / params.steps_per_rev;
}

ActuationResult actuate(const DutyCommand& command, const MotorState& motor_state,
                        const StateVector& plant_state, double dt,
                        const MotorParams& params) {
  if (!(dt > 0.0)) throw std::domain_error("actuate: dt must be > 0");

  const double rolling = plant_state.v / params.wheel_radius;
  const double half_diff =
      0.5 * (motor_state.wheel_speed_right - motor_state.wheel_speed_left);

  const WheelUpdate left = drive_wheel(command.left, rolling - half_diff, dt, params);
  const WheelUpdate right = drive_wheel(command.right, rolling + half_diff, dt, params);

  ActuationResult out;
  out.motor = {left.speed, right.speed};
  out.force_on_cart = (left.torque + right.torque) / params.wheel_radius;
  out.yaw_rate = params.wheel_radius * (right.speed - left.speed) / params.track_width;
  return out;
}

}  // namespace sbr
