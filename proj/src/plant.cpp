#include "sbr/plant.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("RobotParams: ") + what);
}

StateVector advance(const StateVector& s, const StateDerivative& d, double h) {
  return {s.x + h * d.dx, s.v + h * d.dv, s.theta + h * d.dtheta,
          s.omega + h * d.domega};
}

}  // namespace

void RobotParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  require(positive(cart_mass), "cart_mass must be > 0");
  require(positive(pendulum_mass), "pendulum_mass must be > 0");
  require(positive(com_distance), "com_distance must be > 0");
  require(non_negative(pendulum_inertia), "pendulum_inertia must be >= 0");
  require(positive(wheel_radius), "wheel_radius must be > 0");
  require(positive(gravity), "gravity must be > 0");
  require(non_negative(cart_friction), "cart_friction must be >= 0");
  require(non_negative(pivot_friction), "pivot_friction must be >= 0");
}

bool is_finite(const StateVector& s) {
  return std::isfinite(s.x) && std::isfinite(s.v) && std::isfinite(s.theta) &&
         std::isfinite(s.omega);
}

StateDerivative derivatives(const StateVector& state, double force,
                            const RobotParams& p) {
  if (!is_finite(state) || !std::isfinite(force))
    throw std::domain_error("derivatives: non-finite state or force");

  const double s = std::sin(state.theta);
  const double c = std::cos(state.theta);
  const double ml = p.pendulum_mass * p.com_distance;

  // [a b; b d] [dv; domega] = [f1; f2]
  const double a = p.cart_mass + p.pendulum_mass;
  const double b = ml * c;
  const double d = p.pendulum_inertia + ml * p.com_distance;
  const double f1 = force - p.cart_friction * state.v +
                    ml * state.omega * state.omega * s;
  const double f2 = ml * p.gravity * s - p.pivot_friction * state.omega;

  // a*d >= (M+m)*m*l^2 > m^2*l^2 >= b^2, so det > 0 for valid params.
  const double det = a * d - b * b;
  return {state.v, (d * f1 - b * f2) / det, state.omega, (a * f2 - b * f1) / det};
}

StateVector step(const StateVector& state, double force, double dt,
                 const RobotParams& params) {
  if (!(dt > 0.0 && dt <= kMaxPhysicsStep))
    throw std::domain_error("step: dt must lie in (0, 0.01] s");

  const StateDerivative k1 = derivatives(state, force, params);
  const StateDerivative k2 = derivatives(advance(state, k1, 0.5 * dt), force, params);
  const StateDerivative k3 = derivatives(advance(state, k2, 0.5 * dt), force, params);
  const StateDerivative k4 = derivatives(advance(state, k3, dt), force, params);

  const double w = dt / 6.0;
  return {state.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
          state.v + w * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
          state.theta + w * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta),
          state.omega + w * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega)};
}

double total_energy(const StateVector& s, const RobotParams& p) {
  if (!is_finite(s)) throw std::domain_error("total_energy: non-finite state");
  const double m = p.pendulum_mass;
  const double l = p.com_distance;
  const double c = std::cos(s.theta);
  const double kinetic = 0.5 * (p.cart_mass + m) * s.v * s.v +
                         m * l * s.v * s.omega * c +
                         0.5 * (p.pendulum_inertia + m * l * l) * s.omega * s.omega;
  const double potential = m * p.gravity * l * (c - 1.0);
  return kinetic + potential;
}

Linearization linearize(const RobotParams& p) {
  p.validate();
  const double ml = p.pendulum_mass * p.com_distance;
  const double a = p.cart_mass + p.pendulum_mass;
  const double d = p.pendulum_inertia + ml * p.com_distance;
  const double det = a * d - ml * ml;
  const double mgl = ml * p.gravity;

  Linearization lin;
  auto& A = lin.state_matrix;
  A[0] = {0.0, 1.0, 0.0, 0.0};
  A[1] = {0.0, -d * p.cart_friction / det, -ml * mgl / det, ml * p.pivot_friction / det};
  A[2] = {0.0, 0.0, 0.0, 1.0};
  A[3] = {0.0, ml * p.cart_friction / det, a * mgl / det, -a * p.pivot_friction / det};
  lin.input_vector = {0.0, d / det, 0.0, -ml / det};
  return lin;
}

}  // namespace sbr
