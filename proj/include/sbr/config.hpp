#pragma once

// Scenario files: flat `key = value` lines, `#` starts a comment. Keys are
// namespaced (`plant.cart_mass`, `control.outer.kp`, ...). The only
// repeatable key is `command = <time> <frame>`, which appends a scripted
// command such as `command = 2.0 F`.

#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sbr/simloop.hpp"

namespace sbr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sets one key on top of `cfg`. Throws ConfigError for unknown keys or bad
/// values.
void set_config_value(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Applies a `key=value` override string.
void apply_override(ScenarioConfig& cfg, std::string_view key_value);

/// Parses a whole file on top of the built-in defaults and validates the
/// result. Errors carry `<source>:<line>`.
ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<input>");
ScenarioConfig load_scenario(const std::string& path);

/// Parses, applies overrides in order, then validates.
ScenarioConfig load_scenario(const std::string& path, const std::vector<std::string>& overrides);

/// Every key with its current value, one per line, parseable by
/// parse_scenario.
std::string format_scenario(const ScenarioConfig& cfg);

std::vector<std::string> config_keys();

}  // namespace sbr
