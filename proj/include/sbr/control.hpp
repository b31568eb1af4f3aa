#pragma once

// Cascaded balance controller: tilt PID -> wheel-speed set-point, speed PID
// -> base duty, then a left/right mixer for turning.

#include <string_view>

#include "sbr/actuation.hpp"
#include "sbr/command.hpp"

namespace sbr {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  void validate() const;
  bool operator==(const PidGains&) const = default;
};

struct PidState {
  double integral = 0.0;
  double last_error = 0.0;
  double output_limit = 0.0;
  double integral_limit = 0.0;

  /// Zeroed accumulators with integral_limit = output_limit / max(ki, eps).
  static PidState fresh(const PidGains& gains, double output_limit);
};

struct PidStep {
  double output;
  PidState state;
};

/// Positional PID with the derivative taken on the error:
///   P = kp e,  I = ki * clamp(sum e dt),  D = kd (e - e_prev) / dt
PidStep pid_step(const PidGains& gains, const PidState& state, double error, double dt);

struct SteeringState {
  double drive_offset = 0.0;  // rad added to the tilt set-point
  double turn = 0.0;          // duty differential

  bool operator==(const SteeringState&) const = default;
};

inline constexpr double kMaxDriveOffset = 0.1;

enum class Status { Balancing, Fallen };

std::string_view to_string(Status s);

struct ControlOutput {
  DutyCommand duty;
  Status status = Status::Balancing;
};

struct ControlConfig {
  PidGains outer{18.0, 60.0, 0.9};   // per rad of tilt error
  PidGains inner{0.04, 0.25, 0.0};   // per rad/s of wheel-speed error
  double outer_output_limit = 0.0;   // rad/s; <= 0 means the motor's top speed
  double inner_output_limit = 1.0;   // duty
  double fall_threshold = 0.35;      // rad
  double drive_step = 0.03;          // rad
  double turn_step = 0.15;
  double mix_gain = 1.0;

  void validate() const;
};

struct ControllerState {
  PidState outer;
  PidState inner;
  bool fallen = false;
};

/// Fresh PID states. `max_wheel_speed` bounds the outer loop output when
/// cfg.outer_output_limit is not set.
ControllerState reset_controller(const ControlConfig& cfg, double max_wheel_speed);

/// One control tick. Latches Fallen once |theta_est| exceeds the threshold;
/// only reset_controller clears the latch.
ControlOutput balance_step(double theta_est, double wheel_speed_avg,
                           const SteeringState& steering, const ControlConfig& cfg,
                           ControllerState& state, double dt);

/// Steering commands replace (not accumulate) the current set-point; other
/// commands leave the steering untouched.
SteeringState apply_command(const SteeringState& steering, const Command& command,
                            const ControlConfig& cfg);

}  // namespace sbr
