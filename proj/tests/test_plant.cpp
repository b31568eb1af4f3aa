#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "sbr/plant.hpp"

using namespace sbr;

namespace {

// Energy from explicit point velocities of the pendulum's center of mass.
double oracle_energy(const StateVector& s, const RobotParams& p) {
  const double vx = s.v + p.com_distance * s.omega * std::cos(s.theta);
  const double vz = -p.com_distance * s.omega * std::sin(s.theta);
  const double kinetic = 0.5 * p.cart_mass * s.v * s.v +
                         0.5 * p.pendulum_mass * (vx * vx + vz * vz) +
                         0.5 * p.pendulum_inertia * s.omega * s.omega;
  const double potential =
      p.pendulum_mass * p.gravity * p.com_distance * (std::cos(s.theta) - 1.0);
  return kinetic + potential;
}

double det4(Matrix4 m) {
  double det = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (m[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(m[pivot], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < 4; ++r) {
      const double k = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= k * m[col][c];
    }
  }
  return det;
}

// det(sI - A)
double char_poly(const Matrix4& a, double s) {
  Matrix4 m{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) m[i][j] = (i == j ? s : 0.0) - a[i][j];
  }
  return det4(m);
}

StateVector random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {u(rng), u(rng), 1.2 * u(rng), 3.0 * u(rng)};
}

}  // namespace

TEST_CASE("upright equilibrium has zero derivative") {
  const StateDerivative d = derivatives({}, 0.0, RobotParams{});
  CHECK(d == StateDerivative{});
}

TEST_CASE("gravity accelerates the tilt in the direction of the lean") {
  const RobotParams p = RobotParams{}.frictionless();
  CHECK(derivatives({0, 0, 0.1, 0}, 0.0, p).domega > 0.0);
  CHECK(derivatives({0, 0, -0.1, 0}, 0.0, p).domega < 0.0);
}

TEST_CASE("hand-solved 2x2 system at 30 degrees") {
  RobotParams p;
  p.cart_mass = 1.0;
  p.pendulum_mass = 0.2;
  p.com_distance = 0.15;
  p.pendulum_inertia = 0.0;
  p.wheel_radius = 0.03;
  p.gravity = 9.81;
  p = p.frictionless();
  // a11 = 1.2, a12 = 0.03 cos(pi/6), a22 = 0.0045, rhs = (0, 0.14715),
  // det = 0.004725.
  const StateDerivative d = derivatives({0, 0, std::numbers::pi / 6, 0}, 0.0, p);
  CHECK(d.dv == doctest::Approx(-0.8091151629643184).epsilon(1e-12));
  CHECK(d.domega == doctest::Approx(37.37142857142857).epsilon(1e-12));
  CHECK(d.dx == 0.0);
  CHECK(d.dtheta == 0.0);
}

TEST_CASE("derivatives agree with the Cramer oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> force(-20.0, 20.0);
  const RobotParams p;
  for (int i = 0; i < 200; ++i) {
    const StateVector s = random_state(rng);
    const double f = force(rng);
    const StateDerivative got = derivatives(s, f, p);
    const StateDerivative want = oracle::derivatives(s, f, p);
    CHECK(got.dv == doctest::Approx(want.dv).epsilon(1e-12));
    CHECK(got.domega == doctest::Approx(want.domega).epsilon(1e-12));
  }
}

TEST_CASE("equations of motion are odd") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> force(-20.0, 20.0);
  const RobotParams p;
  for (int i = 0; i < 200; ++i) {
    const StateVector s = random_state(rng);
    const double f = force(rng);
    const StateDerivative a = derivatives(s, f, p);
    const StateDerivative b = derivatives({-s.x, -s.v, -s.theta, -s.omega}, -f, p);
    CHECK(b.dx == -a.dx);
    CHECK(b.dv == doctest::Approx(-a.dv).epsilon(1e-14));
    CHECK(b.dtheta == -a.dtheta);
    CHECK(b.domega == doctest::Approx(-a.domega).epsilon(1e-14));
  }
}

TEST_CASE("mass matrix stays invertible for any tilt and valid parameters") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 500; ++i) {
    RobotParams p;
    p.cart_mass = u(rng);
    p.pendulum_mass = u(rng);
    p.com_distance = u(rng);
    p.pendulum_inertia = i % 2 == 0 ? 0.0 : u(rng) * 0.01;
    REQUIRE_NOTHROW(p.validate());
    const double th = angle(rng);
    const double ml = p.pendulum_mass * p.com_distance;
    const double det = (p.cart_mass + p.pendulum_mass) *
                           (p.pendulum_inertia + ml * p.com_distance) -
                       ml * ml * std::cos(th) * std::cos(th);
    CHECK(det > 0.0);
    CHECK(is_finite(step({0, 0, th, 0}, 1.0, 0.001, p)));
  }
}

TEST_CASE("invalid input is rejected") {
  const RobotParams p;
  CHECK_THROWS_AS(derivatives({0, 0, NAN, 0}, 0.0, p), std::domain_error);
  CHECK_THROWS_AS(derivatives({}, INFINITY, p), std::domain_error);
  CHECK_THROWS_AS(step({}, 0.0, 0.0, p), std::domain_error);
  CHECK_THROWS_AS(step({}, 0.0, -0.001, p), std::domain_error);
  CHECK_THROWS_AS(step({}, 0.0, 0.0101, p), std::domain_error);
  CHECK_THROWS_AS(step({}, 0.0, NAN, p), std::domain_error);
  CHECK_NOTHROW(step({}, 0.0, kMaxPhysicsStep, p));

  RobotParams bad = p;
  bad.cart_mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.pendulum_inertia = -1e-6;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.cart_friction = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("RK4 step leaves the equilibrium untouched") {
  CHECK(step({}, 0.0, 0.001, RobotParams{}) == StateVector{});
}

TEST_CASE("RK4 at 1 ms tracks a 1 us Euler oracle over one second") {
  // Swings about the hanging position stay bounded, so the Euler oracle is
  // itself accurate to well under the tolerance there.
  const RobotParams p;
  const StateVector starts[] = {{0, 0, 3.0, 0}, {0, 0, 3.14159, 1.0}, {0.1, 0.2, 2.5, -0.5}};
  const double forces[] = {0.0, 0.5, -0.3};
  for (std::size_t k = 0; k < std::size(starts); ++k) {
    StateVector rk = starts[k];
    for (int i = 0; i < 1000; ++i) rk = step(rk, forces[k], 0.001, p);
    const StateVector eu = oracle::euler(starts[k], forces[k], 1e-6, 1'000'000, p);
    CHECK(oracle::max_deviation(rk, eu) < 1e-4);
  }
}

TEST_CASE("falling starts match the extrapolated Euler limit") {
  // Once the body falls, |omega| reaches tens of rad/s and Euler at 1 us
  // carries ~1e-3 of first-order error. Halving its step halves the gap and
  // the Richardson combination 2 E(h/2) - E(h) lands on RK4.
  const RobotParams p;
  const StateVector starts[] = {{0, 0, 0.1, 0}, {0.2, -0.3, -0.05, 0.4}, {0, 0.5, 0.02, -0.1}};
  for (const StateVector& s0 : starts) {
    StateVector rk = s0;
    for (int i = 0; i < 1000; ++i) rk = step(rk, 0.0, 0.001, p);
    const StateVector e1 = oracle::euler(s0, 0.0, 1e-6, 1'000'000, p);
    const StateVector e2 = oracle::euler(s0, 0.0, 5e-7, 2'000'000, p);
    const StateVector extrapolated{2 * e2.x - e1.x, 2 * e2.v - e1.v, 2 * e2.theta - e1.theta,
                                   2 * e2.omega - e1.omega};
    const double gap1 = oracle::max_deviation(rk, e1);
    const double gap2 = oracle::max_deviation(rk, e2);
    CHECK(gap2 == doctest::Approx(gap1 / 2).epsilon(0.02));
    CHECK(oracle::max_deviation(rk, extrapolated) < 1e-6);
  }
}

TEST_CASE("frictionless energy is conserved") {
  const RobotParams p = RobotParams{}.frictionless();
  StateVector s{0, 0, 0.1, 0};
  const double e0 = total_energy(s, p);
  for (int i = 0; i < 1000; ++i) s = step(s, 0.0, 0.001, p);
  CHECK(std::abs(total_energy(s, p) - e0) / (std::abs(e0) + 1e-12) < 1e-6);
  for (int i = 0; i < 9000; ++i) s = step(s, 0.0, 0.001, p);
  CHECK(std::abs(total_energy(s, p) - e0) / (std::abs(e0) + 1e-12) < 1e-5);
}

TEST_CASE("total energy reference points") {
  const RobotParams p;
  CHECK(total_energy({}, p) == 0.0);
  CHECK(total_energy({0, 1, 0, 0}, p) == doctest::Approx(0.5 * (p.cart_mass + p.pendulum_mass)));
  CHECK(total_energy({0, 0, std::numbers::pi, 0}, p) ==
        doctest::Approx(-2.0 * p.pendulum_mass * p.gravity * p.com_distance));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const StateVector s = random_state(rng);
    CHECK(total_energy(s, p) == doctest::Approx(oracle_energy(s, p)).epsilon(1e-12));
  }
}

TEST_CASE("linearization matches central differences") {
  for (const RobotParams& p : {RobotParams{}, RobotParams{}.frictionless()}) {
    const Linearization lin = linearize(p);
    const double h = 1e-6;
    auto as_vec = [](const StateDerivative& d) { return Vector4{d.dx, d.dv, d.dtheta, d.domega}; };
    for (int j = 0; j < 4; ++j) {
      StateVector plus{};
      StateVector minus{};
      double* pp[] = {&plus.x, &plus.v, &plus.theta, &plus.omega};
      double* pm[] = {&minus.x, &minus.v, &minus.theta, &minus.omega};
      *pp[j] = h;
      *pm[j] = -h;
      const Vector4 fp = as_vec(derivatives(plus, 0.0, p));
      const Vector4 fm = as_vec(derivatives(minus, 0.0, p));
      for (int i = 0; i < 4; ++i) {
        CHECK(lin.state_matrix[i][j] == doctest::Approx((fp[i] - fm[i]) / (2 * h)).epsilon(1e-6));
      }
    }
    const Vector4 fp = as_vec(derivatives({}, h, p));
    const Vector4 fm = as_vec(derivatives({}, -h, p));
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(lin.input_vector[i] - (fp[i] - fm[i]) / (2 * h)) < 1e-6);
    }
    CHECK(lin.state_matrix[2][3] == 1.0);
  }
}

TEST_CASE("upright equilibrium has a positive real eigenvalue") {
  const Linearization lin = linearize(RobotParams{}.frictionless());
  // det(sI - A) is s^2 (s^2 - c) here: negative just above zero and positive
  // for large s, so a real root lies between.
  const double near_zero = char_poly(lin.state_matrix, 0.1);
  const double large = char_poly(lin.state_matrix, 1000.0);
  CHECK(near_zero < 0.0);
  CHECK(large > 0.0);
  double lo = 0.1;
  double hi = 1000.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (char_poly(lin.state_matrix, mid) < 0.0 ? lo : hi) = mid;
  }
  const RobotParams p = RobotParams{}.frictionless();
  const double ml = p.pendulum_mass * p.com_distance;
  const double a = p.cart_mass + p.pendulum_mass;
  const double d = p.pendulum_inertia + ml * p.com_distance;
  const double expected = std::sqrt(a * ml * p.gravity / (a * d - ml * ml));
  CHECK(lo == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("a one degree lean falls without input") {
  const RobotParams p;
  StateVector s{0, 0, 0.017, 0};
  double t = 0.0;
  double prev = s.theta;
  while (std::abs(s.theta) <= 0.35 && t < 10.0) {
    s = step(s, 0.0, 0.001, p);
    t += 0.001;
    if (s.theta * s.omega > 0.0) {
      CHECK(s.theta >= prev);
    }
    prev = s.theta;
  }
  CHECK(std::abs(s.theta) > 0.35);
  CHECK(t < 10.0);
}
