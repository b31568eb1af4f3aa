#include "sbr/sensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbr {

namespace {

double gaussian(std::mt19937_64& rng, double stddev) {
  if (stddev == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, stddev);
  return dist(rng);
}

}  // namespace

void ImuConfig::validate() const {
  auto non_negative = [](double v) { return std::isfinite(v) && v >= 0.0; };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!non_negative(accel_noise_std) || !non_negative(gyro_noise_std) ||
      !non_negative(gyro_bias_walk_std))
    throw std::invalid_argument("ImuConfig: noise std values must be >= 0");
  if (!std::isfinite(gyro_bias_init))
    throw std::invalid_argument("ImuConfig: gyro_bias_init must be finite");
  if (!positive(accel_range) || !positive(gyro_range))
    throw std::invalid_argument("ImuConfig: ranges must be > 0");
  if (!positive(sample_rate))
    throw std::invalid_argument("ImuConfig: sample_rate must be > 0");
}

ImuConfig ImuConfig::noiseless() const {
  ImuConfig c = *this;
  c.accel_noise_std = 0.0;
  c.gyro_noise_std = 0.0;
  c.gyro_bias_init = 0.0;
  c.gyro_bias_walk_std = 0.0;
  return c;
}

ImuState ImuState::seeded(std::uint64_t seed, const ImuConfig& cfg) {
  return {cfg.gyro_bias_init, std::mt19937_64(seed)};
}

SpecificForce body_specific_force(double theta, double cart_accel, double gravity) {
  // World-frame vector (a, g) rotated into the body frame through -theta.
  // A static lean reads positive; acceleration toward +x adds to the
  // apparent tilt by roughly a/g.
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  return {cart_accel * c + gravity * s, gravity * c - cart_accel * s};
}

ImuSample sample(const StateVector& true_state, double true_cart_accel, double t,
                 ImuState& imu, const ImuConfig& cfg, double dt, double gravity) {
  const SpecificForce f = body_specific_force(true_state.theta, true_cart_accel, gravity);

  ImuSample out;
  out.t = t;
  out.accel_x = f.x + gaussian(imu.rng, cfg.accel_noise_std);
  out.accel_z = f.z + gaussian(imu.rng, cfg.accel_noise_std);
  out.gyro = true_state.omega + imu.gyro_bias + gaussian(imu.rng, cfg.gyro_noise_std);

  imu.gyro_bias += gaussian(imu.rng, cfg.gyro_bias_walk_std * std::sqrt(dt));

  out.accel_x = std::clamp(out.accel_x, -cfg.accel_range, cfg.accel_range);
  out.accel_z = std::clamp(out.accel_z, -cfg.accel_range, cfg.accel_range);
  out.gyro = std::clamp(out.gyro, -cfg.gyro_range, cfg.gyro_range);
  return out;
}

double accel_tilt(const ImuSample& s) {
  if (s.accel_x == 0.0 && s.accel_z == 0.0)
    throw std::domain_error("accel_tilt: zero specific force (free fall)");
  return std::atan2(s.accel_x, s.accel_z);
}

}  // namespace sbr
