#include "sbr/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sbr/protocol.hpp"

namespace sbr {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double v = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError("invalid number '" + std::string(value) + "' for " + std::string(key));
  return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("invalid integer '" + std::string(value) + "' for " + std::string(key));
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);
  return buf;
}

struct Field {
  std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

template <class Member>
Field real(Member member) {
  return {[member](ScenarioConfig& c, std::string_view k, std::string_view v) {
            member(c) = parse_double(k, v);
          },
          [member](const ScenarioConfig& c) { return fmt(member(const_cast<ScenarioConfig&>(c))); }};
}

#define SBR_REAL(path) real([](ScenarioConfig& c) -> double& { return c.path; })

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"sim.duration", SBR_REAL(duration)},
      {"sim.physics_dt", SBR_REAL(physics_dt)},
      {"sim.control_period", SBR_REAL(control_period)},
      {"sim.seed",
       {[](ScenarioConfig& c, std::string_view k, std::string_view v) { c.seed = parse_u64(k, v); },
        [](const ScenarioConfig& c) { return std::to_string(c.seed); }}},
      {"sim.settle_band", SBR_REAL(settle_band)},
      {"sim.settle_hold", SBR_REAL(settle_hold)},

      {"initial.x", SBR_REAL(initial_state.x)},
      {"initial.v", SBR_REAL(initial_state.v)},
      {"initial.theta", SBR_REAL(initial_state.theta)},
      {"initial.omega", SBR_REAL(initial_state.omega)},

      {"plant.cart_mass", SBR_REAL(plant.cart_mass)},
      {"plant.pendulum_mass", SBR_REAL(plant.pendulum_mass)},
      {"plant.com_distance", SBR_REAL(plant.com_distance)},
      {"plant.pendulum_inertia", SBR_REAL(plant.pendulum_inertia)},
      {"plant.wheel_radius", SBR_REAL(plant.wheel_radius)},
      {"plant.gravity", SBR_REAL(plant.gravity)},
      {"plant.cart_friction", SBR_REAL(plant.cart_friction)},
      {"plant.pivot_friction", SBR_REAL(plant.pivot_friction)},

      {"motor.steps_per_rev",
       {[](ScenarioConfig& c, std::string_view k, std::string_view v) {
          const std::uint64_t n = parse_u64(k, v);
          if (n == 0 || n > 1'000'000) throw ConfigError("motor.steps_per_rev out of range");
          c.motor.steps_per_rev = static_cast<int>(n);
        },
        [](const ScenarioConfig& c) { return std::to_string(c.motor.steps_per_rev); }}},
      {"motor.max_step_rate", SBR_REAL(motor.max_step_rate)},
      {"motor.holding_torque", SBR_REAL(motor.holding_torque)},
      {"motor.speed_tracking_gain", SBR_REAL(motor.speed_tracking_gain)},
      {"motor.track_width", SBR_REAL(motor.track_width)},
      {"motor.reflected_inertia",
       {[](ScenarioConfig& c, std::string_view k, std::string_view v) {
          c.motor.reflected_inertia = parse_double(k, v);
          c.explicit_reflected_inertia = true;
        },
        [](const ScenarioConfig& c) { return fmt(c.effective_motor().reflected_inertia); }}},

      {"imu.accel_noise_std", SBR_REAL(imu.accel_noise_std)},
      {"imu.gyro_noise_std", SBR_REAL(imu.gyro_noise_std)},
      {"imu.gyro_bias_init", SBR_REAL(imu.gyro_bias_init)},
      {"imu.gyro_bias_walk_std", SBR_REAL(imu.gyro_bias_walk_std)},
      {"imu.accel_range", SBR_REAL(imu.accel_range)},
      {"imu.gyro_range", SBR_REAL(imu.gyro_range)},
      {"imu.sample_rate", SBR_REAL(imu.sample_rate)},

      {"filter.alpha", SBR_REAL(filter.alpha)},

      {"control.outer.kp", SBR_REAL(control.outer.kp)},
      {"control.outer.ki", SBR_REAL(control.outer.ki)},
      {"control.outer.kd", SBR_REAL(control.outer.kd)},
      {"control.outer.output_limit", SBR_REAL(control.outer_output_limit)},
      {"control.inner.kp", SBR_REAL(control.inner.kp)},
      {"control.inner.ki", SBR_REAL(control.inner.ki)},
      {"control.inner.kd", SBR_REAL(control.inner.kd)},
      {"control.inner.output_limit", SBR_REAL(control.inner_output_limit)},
      {"control.fall_threshold", SBR_REAL(control.fall_threshold)},
      {"control.drive_step", SBR_REAL(control.drive_step)},
      {"control.turn_step", SBR_REAL(control.turn_step)},
      {"control.mix_gain", SBR_REAL(control.mix_gain)},
  };
  return table;
}

#undef SBR_REAL

void add_scripted_command(ScenarioConfig& cfg, std::string_view value) {
  const auto space = value.find(' ');
  if (space == std::string_view::npos)
    throw ConfigError("command expects '<time> <frame>', got '" + std::string(value) + "'");
  const double time = parse_double("command", value.substr(0, space));
  const std::string frame(trim(value.substr(space + 1)));
  const ParseResult parsed = parse_frame(frame);
  if (const auto* err = std::get_if<ProtocolError>(&parsed))
    throw ConfigError("command '" + frame + "': " + std::string(to_string(*err)));
  cfg.script.push_back({time, std::get<Command>(parsed)});
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : fields()) keys.push_back(k);
  keys.emplace_back("command");
  return keys;
}

void set_config_value(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "command") {
    add_scripted_command(cfg, value);
    return;
  }
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  it->second.set(cfg, key, value);
}

void apply_override(ScenarioConfig& cfg, std::string_view key_value) {
  const auto eq = key_value.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(key_value) + "' is not key=value");
  set_config_value(cfg, key_value.substr(0, eq), key_value.substr(eq + 1));
}

ScenarioConfig parse_scenario(std::istream& in, const std::string& source) {
  ScenarioConfig cfg;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  return parse_scenario(file, path);
}

ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides) {
  ScenarioConfig cfg = load_scenario(path);
  for (const auto& o : overrides) {
    try {
      apply_override(cfg, o);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("override: ") + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("after overrides: ") + e.what());
  }
  return cfg;
}

std::string format_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : fields()) {
    if (key == "motor.reflected_inertia" && !cfg.explicit_reflected_inertia) continue;
    out << key << " = " << field.get(cfg) << '\n';
  }
  for (const auto& s : cfg.script) out << "command = " << fmt(s.time) << ' ' << to_wire(s.command) << '\n';
  return out.str();
}

}  // namespace sbr
