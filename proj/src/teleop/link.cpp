#include "sbr/teleop/link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbr::teleop {

void LinkConfig::validate() const {
  if (!std::isfinite(latency_mean) || latency_mean < 0.0) {
    throw std::invalid_argument("latency_mean must be finite and >= 0");
  }
  if (!std::isfinite(latency_jitter_std) || latency_jitter_std < 0.0) {
    throw std::invalid_argument("latency_jitter_std must be finite and >= 0");
  }
  if (max_frame_bytes < 2) throw std::invalid_argument("max_frame_bytes must be >= 2");
}

LatencyModel::LatencyModel(const LinkConfig& cfg, std::uint64_t seed)
    : rng_(seed), mean_(cfg.latency_mean), std_(cfg.latency_jitter_std) {
  cfg.validate();
  min_ = from_seconds(std::max(0.0, mean_ - 3.0 * std_));
  max_ = from_seconds(mean_ + 3.0 * std_);
}

SimTime LatencyModel::draw_delay() {
  std::lock_guard lock(mutex_);
  if (std_ == 0.0) return from_seconds(mean_);
  std::normal_distribution<double> jitter(mean_, std_);
  return std::clamp(from_seconds(jitter(rng_)), min_, max_);
}

SimTime LatencyModel::schedule(std::uint32_t client, SimTime receipt) {
  const SimTime delay = draw_delay();
  std::lock_guard lock(mutex_);
  SimTime at = receipt + delay;
  auto [it, inserted] = last_apply_.try_emplace(client, at);
  if (!inserted) {
    at = std::max(at, it->second);
    it->second = at;
  }
  return at;
}

CommandIngress::CommandIngress(const LinkConfig& cfg, std::uint64_t seed,
                               const SimClock& clock, CommandQueue& queue)
    : latency_(cfg, seed), clock_(clock), queue_(queue) {}

TimedCommand CommandIngress::submit(std::uint32_t client, const Command& c) {
  return submit_at(client, c, clock_.now());
}

TimedCommand CommandIngress::submit_at(std::uint32_t client, const Command& c,
                                       SimTime receipt) {
  TimedCommand tc;
  tc.received_at = receipt;
  tc.apply_at = latency_.schedule(client, receipt);
  tc.client = client;
  tc.sequence = sequence_.fetch_add(1);
  tc.command = c;
  queue_.push(tc);
  return tc;
}

}  // namespace sbr::teleop
