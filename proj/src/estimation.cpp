#include "sbr/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace sbr {

void FilterConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("FilterConfig: alpha must lie in [0, 1]");
}

FilterState update(const FilterState& state, double gyro, double accel_tilt,
                   double dt, const FilterConfig& cfg) {
  if (!(dt > 0.0)) throw std::domain_error("filter update: dt must be > 0");
  if (!std::isfinite(state.theta_est) || !std::isfinite(gyro) ||
      !std::isfinite(accel_tilt) || !std::isfinite(dt))
    throw std::domain_error("filter update: non-finite input");
  const double predicted = state.theta_est + gyro * dt;
  return {cfg.alpha * predicted + (1.0 - cfg.alpha) * accel_tilt};
}

FilterState reset(double initial_tilt) {
  if (!std::isfinite(initial_tilt)) throw std::domain_error("filter reset: non-finite tilt");
  return {initial_tilt};
}

}  // namespace sbr
