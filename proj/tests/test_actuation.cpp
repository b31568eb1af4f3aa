#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "sbr/actuation.hpp"

using namespace sbr;

TEST_CASE("duty maps linearly onto step rate") {
  MotorParams p;
  CHECK(duty_to_step_rate(0.0, p) == 0.0);
  CHECK(duty_to_step_rate(1.0, p) == p.max_step_rate);
  CHECK(duty_to_step_rate(-1.0, p) == -p.max_step_rate);
  CHECK(duty_to_step_rate(3.0, p) == p.max_step_rate);
  CHECK(duty_to_step_rate(NAN, p) == 0.0);
  p.max_step_rate = 1000.0;
  CHECK(duty_to_step_rate(0.5, p) == 500.0);
}

TEST_CASE("step rate converts to wheel and rim speed") {
  const MotorParams p;
  CHECK(step_rate_to_wheel_speed(200.0, p) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(step_rate_to_wheel_speed(0.0, p) == 0.0);
  // one revolution per second on a 60 mm wheel
  CHECK(step_rate_to_wheel_speed(200.0, p) * p.wheel_radius == doctest::Approx(0.1885).epsilon(1e-3));
  CHECK(p.max_wheel_speed() == doctest::Approx(4000.0 * 2.0 * std::numbers::pi / 200.0));
}

TEST_CASE("holding torque default is 3.2 kgf cm") {
  CHECK(MotorParams{}.holding_torque == doctest::Approx(0.3138).epsilon(1e-3));
}

TEST_CASE("idle motors on a resting cart produce nothing") {
  const ActuationResult r = actuate({0, 0}, {}, {}, 0.01, MotorParams{});
  CHECK(r.force_on_cart == 0.0);
  CHECK(r.yaw_rate == 0.0);
  CHECK(r.motor.wheel_speed_left == 0.0);
  CHECK(r.motor.wheel_speed_right == 0.0);
}

TEST_CASE("equal commands give no yaw") {
  for (double d : {-1.0, -0.3, 0.2, 0.9}) {
    CHECK(actuate({d, d}, {}, {0, 0.1, 0, 0}, 0.01, MotorParams{}).yaw_rate == 0.0);
  }
}

TEST_CASE("full duty from rest clips at holding torque") {
  const MotorParams p;
  const double unclipped = p.reflected_inertia * p.speed_tracking_gain * p.max_wheel_speed();
  REQUIRE(unclipped > p.holding_torque);
  const ActuationResult r = actuate({1, 1}, {}, {}, 0.01, p);
  CHECK(r.force_on_cart == doctest::Approx(2.0 * p.holding_torque / p.wheel_radius).epsilon(1e-12));
  CHECK(r.force_on_cart == doctest::Approx(20.92).epsilon(1e-3));
}

TEST_CASE("small demand is not clipped") {
  const MotorParams p;
  const double duty = 0.01;
  const double target = duty * p.max_wheel_speed();
  const ActuationResult r = actuate({duty, duty}, {}, {}, 0.01, p);
  const double torque = p.reflected_inertia * p.speed_tracking_gain * target;
  REQUIRE(torque < p.holding_torque);
  CHECK(r.force_on_cart == doctest::Approx(2.0 * torque / p.wheel_radius));
  CHECK(r.motor.wheel_speed_left == doctest::Approx(p.speed_tracking_gain * 0.01 * target));
}

TEST_CASE("force bound, mirror symmetry and speed bound hold for random inputs") {
  const MotorParams p;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> duty(-1.5, 1.5);
  std::uniform_real_distribution<double> speed(-130.0, 130.0);
  std::uniform_real_distribution<double> vel(-3.0, 3.0);
  const double bound = 2.0 * p.holding_torque / p.wheel_radius;
  for (int i = 0; i < 2000; ++i) {
    const DutyCommand c = DutyCommand::clamped(duty(rng), duty(rng));
    const MotorState m{speed(rng), speed(rng)};
    const StateVector s{0, vel(rng), 0, 0};
    const ActuationResult a = actuate(c, m, s, 0.01, p);
    CHECK(std::abs(a.force_on_cart) <= bound * (1 + 1e-12));
    CHECK(std::abs(a.motor.wheel_speed_left) <= p.max_wheel_speed());
    CHECK(std::abs(a.motor.wheel_speed_right) <= p.max_wheel_speed());

    const MotorState mirrored_state{m.wheel_speed_right, m.wheel_speed_left};
    const ActuationResult b = actuate({c.right, c.left}, mirrored_state, s, 0.01, p);
    CHECK(b.yaw_rate == doctest::Approx(-a.yaw_rate).epsilon(1e-12));
    CHECK(b.force_on_cart == doctest::Approx(a.force_on_cart).epsilon(1e-12));
  }
}

TEST_CASE("zero command settles both wheels onto the rolling speed") {
  const MotorParams p;
  const StateVector s{0, 0.3, 0, 0};
  MotorState m{5.0, 25.0};
  double spread = std::abs(m.wheel_speed_right - m.wheel_speed_left);
  for (int i = 0; i < 200; ++i) {
    m = actuate({0, 0}, m, s, 0.01, p).motor;
    const double now = std::abs(m.wheel_speed_right - m.wheel_speed_left);
    CHECK(now <= spread);
    CHECK(std::isfinite(m.wheel_speed_left));
    spread = now;
  }
  CHECK(spread < 1e-6);
}

TEST_CASE("yaw rate follows the wheel speed difference") {
  const MotorParams p;
  const ActuationResult r = actuate({-0.2, 0.2}, {}, {}, 0.01, p);
  CHECK(r.yaw_rate > 0.0);
  CHECK(r.yaw_rate == doctest::Approx(p.wheel_radius *
                                      (r.motor.wheel_speed_right - r.motor.wheel_speed_left) /
                                      p.track_width));
  CHECK(r.force_on_cart == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("clamped duty command") {
  CHECK(DutyCommand::clamped(2.0, -7.0) == DutyCommand{1.0, -1.0});
  CHECK(DutyCommand::clamped(NAN, 0.5) == DutyCommand{0.0, 0.5});
}

TEST_CASE("motor parameter validation") {
  MotorParams p;
  CHECK_NOTHROW(p.validate());
  p.steps_per_rev = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = MotorParams{};
  p.speed_tracking_gain = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = MotorParams{};
  p.holding_torque = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(actuate({}, {}, {}, 0.0, MotorParams{}), std::domain_error);
}
