#pragma once

// Planar cart-pole model of the two-wheeled robot: the wheel axle is the
// cart, the body is a rigid pendulum pinned at the axle. See
// docs/dynamics.md for the derivation.

#include <array>

namespace sbr {

struct RobotParams {
  double cart_mass = 0.6;         // M [kg], wheels + axle + motors
  double pendulum_mass = 0.4;     // m [kg]
  double com_distance = 0.10;     // l [m], axle to body center of mass
  double pendulum_inertia = 0.4 * 0.10 * 0.10 / 3.0;  // J [kg m^2] about the COM
  double wheel_radius = 0.030;    // r [m], 60 mm wheels
  double gravity = 9.81;          // g [m/s^2]
  double cart_friction = 0.1;     // b_x [N s/m]
  double pivot_friction = 0.001;  // b_t [N m s/rad]

  /// Throws std::invalid_argument when a field violates its bound.
  void validate() const;

  RobotParams frictionless() const {
    RobotParams p = *this;
    p.cart_friction = 0.0;
    p.pivot_friction = 0.0;
    return p;
  }
};

/// True plant state. theta is measured from upright, positive when the body
/// leans toward +x. It is never wrapped.
struct StateVector {
  double x = 0.0;
  double v = 0.0;
  double theta = 0.0;
  double omega = 0.0;

  bool operator==(const StateVector&) const = default;
};

struct StateDerivative {
  double dx = 0.0;
  double dv = 0.0;
  double dtheta = 0.0;
  double domega = 0.0;

  bool operator==(const StateDerivative&) const = default;
};

using Matrix4 = std::array<std::array<double, 4>, 4>;
using Vector4 = std::array<double, 4>;

/// Jacobians of the dynamics at the upright equilibrium. State ordering is
/// (x, v, theta, omega).
struct Linearization {
  Matrix4 state_matrix{};
  Vector4 input_vector{};
};

inline constexpr double kMaxPhysicsStep = 0.01;

/// Solves the coupled cart/pendulum equations for (dv, domega) under a
/// horizontal force on the cart. Throws std::domain_error on non-finite input.
StateDerivative derivatives(const StateVector& state, double force,
                            const RobotParams& params);

/// One classical RK4 step with the force held constant. dt must lie in
/// (0, kMaxPhysicsStep].
StateVector step(const StateVector& state, double force, double dt,
                 const RobotParams& params);

/// Kinetic plus potential energy, with the potential zeroed upright so the
/// resting upright robot has exactly zero energy.
double total_energy(const StateVector& state, const RobotParams& params);

Linearization linearize(const RobotParams& params);

bool is_finite(const StateVector& s);

}  // namespace sbr
