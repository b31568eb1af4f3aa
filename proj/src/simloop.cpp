#include "sbr/simloop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sbr {

void ScenarioConfig::validate() const {
  if (!(std::isfinite(duration) && duration > 0.0))
    throw std::invalid_argument("scenario: duration must be > 0");
  if (!(physics_dt > 0.0 && physics_dt <= kMaxPhysicsStep))
    throw std::invalid_argument("scenario: physics_dt must lie in (0, 0.01]");
  if (!(std::isfinite(control_period) && control_period > 0.0))
    throw std::invalid_argument("scenario: control_period must be > 0");
  const SimTime period = from_seconds(control_period);
  const SimTime dt = from_seconds(physics_dt);
  if (dt.count() <= 0 || period.count() % dt.count() != 0)
    throw std::invalid_argument("scenario: control_period must be an integer multiple of physics_dt");
  if (!is_finite(initial_state))
    throw std::invalid_argument("scenario: initial state must be finite");
  plant.validate();
  effective_motor().validate();
  if (motor.speed_tracking_gain * control_period > 1.0)
    throw std::invalid_argument("scenario: motor.speed_tracking_gain * control_period must be <= 1");
  imu.validate();
  if (std::abs(imu.sample_rate * control_period - 1.0) > 1e-9)
    throw std::invalid_argument("scenario: imu.sample_rate must equal the control rate");
  filter.validate();
  control.validate();
  if (!(settle_band > 0.0) || !(settle_hold >= 0.0))
    throw std::invalid_argument("scenario: settle band must be > 0 and hold >= 0");
  for (const auto& s : script)
    if (!(std::isfinite(s.time) && s.time >= 0.0))
      throw std::invalid_argument("scenario: scripted command times must be >= 0");
}

int ScenarioConfig::substeps() const {
  return static_cast<int>(from_seconds(control_period).count() /
                          from_seconds(physics_dt).count());
}

MotorParams ScenarioConfig::effective_motor() const {
  MotorParams m = motor.matched_to(plant);
  if (explicit_reflected_inertia) m.reflected_inertia = motor.reflected_inertia;
  return m;
}

// ---------------------------------------------------------------- metrics

std::optional<double> settling_time(std::span<const TelemetryFrame> trace, double band,
                                    double hold) {
  // Same predicate as MetricsAccumulator: a run is confirmed by the first
  // in-band frame at least `hold` after its start, or by the end of trace.
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double start = trace[i].t;
    bool ok = true;
    for (std::size_t j = i; j < trace.size(); ++j) {
      if (std::abs(trace[j].theta_true) > band) {
        ok = false;
        break;
      }
      if (trace[j].t - start >= hold) break;
    }
    if (ok) return start;
  }
  return std::nullopt;
}

void MetricsAccumulator::add(const TelemetryFrame& f) {
  ++count_;
  sum_sq_ += f.theta_true * f.theta_true;
  max_abs_ = std::max(max_abs_, std::abs(f.theta_true));
  fell_ = fell_ || f.status == Status::Fallen;
  final_x_ = f.x;
  if (settled_at_) return;
  if (std::abs(f.theta_true) <= band_) {
    if (!run_start_) run_start_ = f.t;
    if (f.t - *run_start_ >= hold_) settled_at_ = run_start_;
  } else {
    run_start_.reset();
  }
}

RunMetrics MetricsAccumulator::finish() const {
  RunMetrics m;
  m.fell = fell_;
  m.max_abs_theta = max_abs_;
  m.rms_theta = count_ ? std::sqrt(sum_sq_ / static_cast<double>(count_)) : 0.0;
  m.final_x = final_x_;
  // A run still inside the band at the end of the trace counts as settled.
  const std::optional<double> t = settled_at_ ? settled_at_ : run_start_;
  if (!fell_ && t) {
    m.settled = true;
    m.settling_time = t;
  }
  return m;
}

RunMetrics compute_metrics(std::span<const TelemetryFrame> trace, double band, double hold) {
  MetricsAccumulator acc(band, hold);
  for (const auto& f : trace) acc.add(f);
  return acc.finish();
}

// ------------------------------------------------------------- simulation

double holding_force(const StateVector& s, const RobotParams& p, const MotorParams& motor) {
  // Force that zeroes dv: solve the cart row of the 2x2 system for F.
  const double ml = p.pendulum_mass * p.com_distance;
  const double b = ml * std::cos(s.theta);
  const double d = p.pendulum_inertia + ml * p.com_distance;
  const double f2 = ml * p.gravity * std::sin(s.theta) - p.pivot_friction * s.omega;
  const double f = p.cart_friction * s.v - ml * s.omega * s.omega * std::sin(s.theta) + b * f2 / d;
  const double limit = 2.0 * motor.holding_torque / motor.wheel_radius;
  return std::clamp(f, -limit, limit);
}

Simulation::Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  motor_params_ = cfg_.effective_motor();
  period_ = from_seconds(cfg_.control_period);
  script_ = cfg_.script;
  std::stable_sort(script_.begin(), script_.end(),
                   [](const ScriptedCommand& a, const ScriptedCommand& b) { return a.time < b.time; });
  imu_ = ImuState::seeded(cfg_.seed, cfg_.imu);
  restart();
}

void Simulation::restart() {
  state_ = cfg_.initial_state;
  motor_ = {state_.v / motor_params_.wheel_radius, state_.v / motor_params_.wheel_radius};
  filter_ready_ = false;
  controller_ = reset_controller(cfg_.control, motor_params_.max_wheel_speed());
  steering_ = {};
  force_ = holding_force(state_, cfg_.plant, motor_params_);
}

void Simulation::apply(const Command& c) {
  if (is_steering(c)) {
    steering_ = apply_command(steering_, c, cfg_.control);
  } else if (const auto* g = std::get_if<cmd::SetGains>(&c)) {
    cfg_.control.outer = {g->kp, g->ki, g->kd};
    const PidState limits = PidState::fresh(cfg_.control.outer, controller_.outer.output_limit);
    controller_.outer.integral_limit = limits.integral_limit;
    controller_.outer.integral = std::clamp(controller_.outer.integral, -limits.integral_limit,
                                            limits.integral_limit);
  } else if (const auto* a = std::get_if<cmd::SetAlpha>(&c)) {
    cfg_.filter.alpha = a->alpha;
  } else if (std::holds_alternative<cmd::Reset>(c)) {
    restart();
  }
  // TelemetryRate is a per-session link setting; nothing to do here.
}

TelemetryFrame Simulation::tick(CommandQueue* live) {
  const double t = to_seconds(now_);
  const double dt = cfg_.control_period;

  // Sense.
  const double cart_accel = derivatives(state_, force_, cfg_.plant).dv;
  const ImuSample reading =
      sample(state_, cart_accel, t, imu_, cfg_.imu, dt, cfg_.plant.gravity);
  const double tilt = accel_tilt(reading);
  if (!filter_ready_) {
    filter_ = reset(tilt);
    filter_ready_ = true;
  } else {
    filter_ = update(filter_, reading.gyro, tilt, dt, cfg_.filter);
  }

  // Commands due now: scripted first on equal timestamps.
  std::vector<AppliedCommand> due;
  while (script_next_ < script_.size() && from_seconds(script_[script_next_].time) <= now_) {
    const auto& s = script_[script_next_++];
    const SimTime at = from_seconds(s.time);
    due.push_back({at, now_, at, 0, true, s.command});
  }
  if (live) {
    for (auto& c : live->drain_due(now_))
      due.push_back({c.apply_at, now_, c.received_at, c.client, false, std::move(c.command)});
  }
  std::stable_sort(due.begin(), due.end(), [](const AppliedCommand& a, const AppliedCommand& b) {
    if (a.scheduled != b.scheduled) return a.scheduled < b.scheduled;
    return a.scripted && !b.scripted;
  });
  for (auto& c : due) {
    apply(c.command);
    applied_.push_back(std::move(c));
  }
  if (!filter_ready_) {
    // Reset moved the robot; re-seed the estimate from a fresh reading.
    const double a = derivatives(state_, force_, cfg_.plant).dv;
    filter_ = reset(accel_tilt(sample(state_, a, t, imu_, cfg_.imu, dt, cfg_.plant.gravity)));
    filter_ready_ = true;
  }

  // Control and actuate.
  const double wheel_speed = state_.v / motor_params_.wheel_radius;
  const ControlOutput out =
      balance_step(filter_.theta_est, wheel_speed, steering_, cfg_.control, controller_, dt);
  const ActuationResult act = actuate(out.duty, motor_, state_, dt, motor_params_);
  motor_ = act.motor;
  force_ = act.force_on_cart;
  yaw_rate_ = act.yaw_rate;

  TelemetryFrame frame{t,           state_.theta, filter_.theta_est, state_.x,
                       state_.v,    wheel_speed,  out.duty.left,     out.duty.right,
                       out.status,  act.yaw_rate};

  // Physics with the force held over the control period.
  const int n = cfg_.substeps();
  for (int i = 0; i < n; ++i) state_ = step(state_, force_, cfg_.physics_dt, cfg_.plant);

  now_ += period_;
  return frame;
}

RunResult run(const ScenarioConfig& scenario, CommandQueue* live) {
  Simulation sim(scenario);
  const SimTime end = from_seconds(scenario.duration);
  RunResult result;
  result.trace.reserve(static_cast<std::size_t>(scenario.duration / scenario.control_period) + 1);
  MetricsAccumulator acc(scenario.settle_band, scenario.settle_hold);
  while (sim.now() < end) {
    result.trace.push_back(sim.tick(live));
    acc.add(result.trace.back());
  }
  result.metrics = acc.finish();
  result.applied = sim.applied_commands();
  return result;
}

// ------------------------------------------------------------------ trace

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v + 0.0);
  out << buf;
}

}  // namespace

void write_trace(std::span<const TelemetryFrame> trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& f : trace) {
    for (double v : {f.t, f.theta_true, f.theta_est, f.x, f.v, f.wheel_speed_avg, f.duty_left,
                     f.duty_right}) {
      put(out, v);
      out << ',';
    }
    out << to_string(f.status) << '\n';
  }
}

void write_trace(std::span<const TelemetryFrame> trace, const std::string& path) {
  std::ostringstream buf;
  write_trace(trace, buf);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open trace file '" + path + "' for writing");
  file << buf.str();
  file.flush();
  if (!file) throw std::runtime_error("failed writing trace file '" + path + "'");
}

std::vector<TelemetryFrame> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw std::runtime_error("trace: missing or unexpected header");
  std::vector<TelemetryFrame> frames;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    double values[8];
    for (double& v : values) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("trace: short row");
      v = std::stod(cell);
    }
    std::getline(row, cell);
    Status status;
    if (cell == "Balancing") status = Status::Balancing;
    else if (cell == "Fallen") status = Status::Fallen;
    else throw std::runtime_error("trace: unknown status '" + cell + "'");
    frames.push_back({values[0], values[1], values[2], values[3], values[4], values[5], values[6],
                      values[7], status, 0.0});
  }
  return frames;
}

}  // namespace sbr
