#include "sbr/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sbr {

namespace {

constexpr double kGainEpsilon = 1e-9;

}  // namespace

void PidGains::validate() const {
  for (double g : {kp, ki, kd})
    if (!std::isfinite(g) || g < 0.0)
      throw std::invalid_argument("PidGains: gains must be finite and >= 0");
}

PidState PidState::fresh(const PidGains& gains, double output_limit) {
  PidState s;
  s.output_limit = output_limit;
  s.integral_limit = output_limit / std::max(gains.ki, kGainEpsilon);
  return s;
}

PidStep pid_step(const PidGains& gains, const PidState& state, double error, double dt) {
  if (!std::isfinite(error)) throw std::domain_error("pid_step: non-finite error");
  if (!(dt > 0.0)) throw std::domain_error("pid_step: dt must be > 0");

  PidState next = state;
  next.integral = std::clamp(state.integral + error * dt, -state.integral_limit,
                             state.integral_limit);
  const double derivative = (error - state.last_error) / dt;
  const double raw = gains.kp * error + gains.ki * next.integral + gains.kd * derivative;
  next.last_error = error;
  return {std::clamp(raw, -state.output_limit, state.output_limit), next};
}

std::string_view to_string(Status s) {
  return s == Status::Fallen ? "Fallen" : "Balancing";
}

void ControlConfig::validate() const {
  outer.validate();
  inner.validate();
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!std::isfinite(outer_output_limit))
    throw std::invalid_argument("ControlConfig: outer_output_limit must be finite");
  if (!positive(inner_output_limit) || inner_output_limit > 1.0)
    throw std::invalid_argument("ControlConfig: inner_output_limit must lie in (0, 1]");
  if (!positive(fall_threshold))
    throw std::invalid_argument("ControlConfig: fall_threshold must be > 0");
  if (!std::isfinite(drive_step) || drive_step < 0.0 || drive_step > kMaxDriveOffset)
    throw std::invalid_argument("ControlConfig: drive_step must lie in [0, 0.1]");
  if (!std::isfinite(turn_step) || turn_step < 0.0 || turn_step > 1.0)
    throw std::invalid_argument("ControlConfig: turn_step must lie in [0, 1]");
  if (!std::isfinite(mix_gain) || mix_gain < 0.0)
    throw std::invalid_argument("ControlConfig: mix_gain must be >= 0");
}

ControllerState reset_controller(const ControlConfig& cfg, double max_wheel_speed) {
  const double outer_limit =
      cfg.outer_output_limit > 0.0 ? cfg.outer_output_limit : max_wheel_speed;
  return {PidState::fresh(cfg.outer, outer_limit),
          PidState::fresh(cfg.inner, cfg.inner_output_limit), false};
}

ControlOutput balance_step(double theta_est, double wheel_speed_avg,
                           const SteeringState& steering, const ControlConfig& cfg,
                           ControllerState& state, double dt) {
  if (state.fallen || !(std::abs(theta_est) <= cfg.fall_threshold)) {
    state.fallen = true;
    state.outer = PidState::fresh(cfg.outer, state.outer.output_limit);
    state.inner = PidState::fresh(cfg.inner, state.inner.output_limit);
    return {{0.0, 0.0}, Status::Fallen};
  }

  // A positive error (body behind the set-point) must drive the wheels
  // toward -x to swing the body forward, hence the sign flip.
  const double angle_error = steering.drive_offset - theta_est;
  const PidStep outer = pid_step(cfg.outer, state.outer, angle_error, dt);
  state.outer = outer.state;
  const double speed_setpoint = -outer.output;

  const PidStep inner =
      pid_step(cfg.inner, state.inner, speed_setpoint - wheel_speed_avg, dt);
  state.inner = inner.state;

  const double base = inner.output;
  const double differential = steering.turn * cfg.mix_gain;
  return {DutyCommand::clamped(base - differential, base + differential),
          Status::Balancing};
}

SteeringState apply_command(const SteeringState& steering, const Command& command,
                            const ControlConfig& cfg) {
  SteeringState next = steering;
  const double drive = std::min(cfg.drive_step, kMaxDriveOffset);
  const double turn = std::clamp(cfg.turn_step, 0.0, 1.0);
  if (std::holds_alternative<cmd::Forward>(command)) {
    next.drive_offset = drive;
  } else if (std::holds_alternative<cmd::Backward>(command)) {
    next.drive_offset = -drive;
  } else if (std::holds_alternative<cmd::Left>(command)) {
    next.turn = -turn;
  } else if (std::holds_alternative<cmd::Right>(command)) {
    next.turn = turn;
  } else if (std::holds_alternative<cmd::Stop>(command)) {
    next = {};
  }
  return next;
}

}  // namespace sbr
