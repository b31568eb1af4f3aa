#pragma once

// Multi-rate closed loop: 1 kHz physics under a 100 Hz controller.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbr/actuation.hpp"
#include "sbr/command_queue.hpp"
#include "sbr/control.hpp"
#include "sbr/estimation.hpp"
#include "sbr/plant.hpp"
#include "sbr/sensors.hpp"

namespace sbr {

struct ScriptedCommand {
  double time = 0.0;  // s
  Command command;
};

struct ScenarioConfig {
  double duration = 10.0;        // s
  double physics_dt = 0.001;     // s
  double control_period = 0.01;  // s
  StateVector initial_state;
  std::uint64_t seed = 1;
  RobotParams plant;
  MotorParams motor;
  // When set, the motor's reflected inertia comes from motor.reflected_inertia
  // instead of being derived from the plant masses.
  bool explicit_reflected_inertia = false;
  ImuConfig imu;
  FilterConfig filter;
  ControlConfig control;
  std::vector<ScriptedCommand> script;
  double settle_band = 0.01;  // rad
  double settle_hold = 0.5;   // s

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  /// Physics steps per control tick.
  int substeps() const;

  /// Motor parameters with the wheel radius (and usually the inertia) taken
  /// from the plant.
  MotorParams effective_motor() const;
};

struct TelemetryFrame {
  double t = 0.0;
  double theta_true = 0.0;
  double theta_est = 0.0;
  double x = 0.0;
  double v = 0.0;
  double wheel_speed_avg = 0.0;
  double duty_left = 0.0;
  double duty_right = 0.0;
  Status status = Status::Balancing;
  double yaw_rate = 0.0;  // not part of the CSV or wire formats
};

struct RunMetrics {
  bool settled = false;
  std::optional<double> settling_time;
  double max_abs_theta = 0.0;
  double rms_theta = 0.0;
  bool fell = false;
  double final_x = 0.0;
};

struct AppliedCommand {
  SimTime scheduled{0};
  SimTime applied{0};
  SimTime received{0};
  std::uint32_t client = 0;
  bool scripted = false;
  Command command;
};

/// Force the energized motors exert to keep the cart from accelerating at
/// `state`, capped by holding torque. Used as the force before the first
/// control tick.
double holding_force(const StateVector& state, const RobotParams& plant,
                     const MotorParams& motor);

/// First T with |theta_true| <= band over [T, T + hold], or over the rest of
/// the trace when it ends sooner.
std::optional<double> settling_time(std::span<const TelemetryFrame> trace, double band,
                                    double hold);

/// Streaming metrics so long-running sessions do not need the full trace.
class MetricsAccumulator {
 public:
  MetricsAccumulator(double band, double hold) : band_(band), hold_(hold) {}

  void add(const TelemetryFrame& f);
  RunMetrics finish() const;

 private:
  double band_;
  double hold_;
  std::size_t count_ = 0;
  double sum_sq_ = 0.0;
  double max_abs_ = 0.0;
  bool fell_ = false;
  double final_x_ = 0.0;
  std::optional<double> run_start_;  // start of the current in-band run
  std::optional<double> settled_at_;
};

RunMetrics compute_metrics(std::span<const TelemetryFrame> trace, double band, double hold);

/// Owns the whole closed loop. Single-threaded; live commands arrive through
/// the CommandQueue passed to tick().
class Simulation {
 public:
  explicit Simulation(ScenarioConfig cfg);

  /// Runs one control tick at now() and advances the clock one period.
  TelemetryFrame tick(CommandQueue* live = nullptr);

  SimTime now() const { return now_; }
  SimTime control_period() const { return period_; }
  const StateVector& state() const { return state_; }
  const SteeringState& steering() const { return steering_; }
  const ScenarioConfig& config() const { return cfg_; }
  double last_yaw_rate() const { return yaw_rate_; }
  const std::vector<AppliedCommand>& applied_commands() const { return applied_; }

 private:
  void apply(const Command& c);
  void restart();

  ScenarioConfig cfg_;
  MotorParams motor_params_;
  SimTime period_;
  SimTime now_{0};
  StateVector state_;
  MotorState motor_;
  ImuState imu_;
  FilterState filter_;
  bool filter_ready_ = false;
  ControllerState controller_;
  SteeringState steering_;
  double force_ = 0.0;
  double yaw_rate_ = 0.0;
  std::vector<ScriptedCommand> script_;  // sorted by time
  std::size_t script_next_ = 0;
  std::vector<AppliedCommand> applied_;
};

struct RunResult {
  std::vector<TelemetryFrame> trace;
  RunMetrics metrics;
  std::vector<AppliedCommand> applied;
};

/// Batch run, as fast as possible. Invalid configs throw before any stepping.
RunResult run(const ScenarioConfig& scenario, CommandQueue* live = nullptr);

/// CSV trace, header first, floats at 9 significant digits.
void write_trace(std::span<const TelemetryFrame> trace, std::ostream& out);
void write_trace(std::span<const TelemetryFrame> trace, const std::string& path);
std::vector<TelemetryFrame> read_trace(std::istream& in);

inline constexpr const char* kTraceHeader =
    "t,theta_true,theta_est,x,v,wheel_speed_avg,duty_left,duty_right,status";

}  // namespace sbr
