#include <doctest.h>

#include <sstream>
#include <string>

#include "sbr/config.hpp"

using namespace sbr;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("keys, comments and whitespace") {
  const ScenarioConfig c = parse(
      "# header comment\n"
      "\n"
      "sim.duration = 4   # trailing comment\n"
      "plant.cart_mass=0.7\n"
      "  control.outer.kp =  12.5\n"
      "sim.seed = 99\n"
      "command = 1.5 F\n"
      "command = 2 G 1 2 3\n");
  CHECK(c.duration == 4.0);
  CHECK(c.plant.cart_mass == 0.7);
  CHECK(c.control.outer.kp == 12.5);
  CHECK(c.seed == 99);
  REQUIRE(c.script.size() == 2);
  CHECK(c.script[0].time == 1.5);
  CHECK(std::holds_alternative<cmd::Forward>(c.script[0].command));
  CHECK(std::get<cmd::SetGains>(c.script[1].command) == cmd::SetGains{1, 2, 3});
}

TEST_CASE("unknown keys and bad values are errors with a location") {
  CHECK(error_of("sim.duration = 1\nplant.wheel_size = 3\n").find("test.cfg:2") !=
        std::string::npos);
  CHECK(error_of("plant.wheel_size = 3\n").find("unknown key") != std::string::npos);
  CHECK(!error_of("sim.duration = fast\n").empty());
  CHECK(!error_of("sim.duration 3\n").empty());
  CHECK(!error_of("sim.seed = -1\n").empty());
  CHECK(!error_of("command = 1 Q\n").empty());
  CHECK(!error_of("command = F\n").empty());
  // parsed fine but invalid as a whole
  CHECK(!error_of("plant.cart_mass = 0\n").empty());
  CHECK(!error_of("filter.alpha = 2\n").empty());
}

TEST_CASE("every advertised key is accepted") {
  const ScenarioConfig defaults;
  const std::string dump = format_scenario(defaults);
  for (const std::string& key : config_keys()) {
    // derived from the plant unless set explicitly
    if (key == "command" || key == "motor.reflected_inertia") continue;
    CAPTURE(key);
    CHECK(dump.find(key + " = ") != std::string::npos);
  }
}

TEST_CASE("format then parse reproduces the scenario") {
  ScenarioConfig c;
  c.duration = 3.25;
  c.plant.pendulum_inertia = 1.0 / 3000.0;
  c.control.inner.kp = 0.023;
  c.motor.reflected_inertia = 0.0005;
  c.explicit_reflected_inertia = true;
  c.script = {{0.5, cmd::SetAlpha{0.9}}, {1.0, cmd::Left{}}};
  const std::string once = format_scenario(c);
  const ScenarioConfig back = parse(once);
  CHECK(format_scenario(back) == once);
  CHECK(back.plant.pendulum_inertia == c.plant.pendulum_inertia);
  CHECK(back.explicit_reflected_inertia);
}

TEST_CASE("overrides beat file values") {
  ScenarioConfig c = parse("control.outer.kp = 10\n");
  apply_override(c, "control.outer.kp=20");
  CHECK(c.control.outer.kp == 20.0);
  CHECK_THROWS_AS(apply_override(c, "control.outer.kp"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nope=1"), ConfigError);

  const ScenarioConfig base = load_scenario(SBR_DEFAULT_CONFIG);
  const ScenarioConfig over = load_scenario(SBR_DEFAULT_CONFIG, {"control.outer.kp=0"});
  CHECK(over.control.outer.kp == 0.0);
  CHECK(base.control.outer.kp != 0.0);
  CHECK(run(over).metrics.fell);
  CHECK_FALSE(run(base).metrics.fell);
}

TEST_CASE("missing files are config errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.cfg"), ConfigError);
}
