#pragma once

// Emulated radio link: every inbound command is held back by a seeded,
// bounded latency before it reaches the simulation's command queue.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>

#include "sbr/command_queue.hpp"
#include "sbr/protocol.hpp"

namespace sbr::teleop {

struct LinkConfig {
  double latency_mean = 0.05;        // s
  double latency_jitter_std = 0.01;  // s
  std::size_t max_frame_bytes = kDefaultMaxFrameBytes;

  void validate() const;

  /// Zero jitter: every delay equals latency_mean exactly.
  bool deterministic() const { return latency_jitter_std == 0.0; }
};

/// Draws per-command delays and keeps each client's commands in send order.
/// Delays are normal(mean, jitter) clamped to mean +/- 3 jitter (and never
/// negative). Thread-safe.
class LatencyModel {
 public:
  LatencyModel(const LinkConfig& cfg, std::uint64_t seed);

  SimTime draw_delay();

  /// Arrival time for a command received at `receipt`: receipt + delay,
  /// pushed later if needed so it never overtakes the same client's
  /// previous command.
  SimTime schedule(std::uint32_t client, SimTime receipt);

  SimTime min_delay() const { return min_; }
  SimTime max_delay() const { return max_; }

 private:
  std::mutex mutex_;
  std::mt19937_64 rng_;
  double mean_;
  double std_;
  SimTime min_;
  SimTime max_;
  std::map<std::uint32_t, SimTime> last_apply_;
};

/// Simulation time as seen by the network threads. Written only by the loop.
class SimClock {
 public:
  void publish(SimTime t) { ns_.store(t.count(), std::memory_order_release); }
  SimTime now() const { return SimTime{ns_.load(std::memory_order_acquire)}; }

 private:
  std::atomic<std::int64_t> ns_{0};
};

/// Entry point for session threads: stamps receipt time, applies latency
/// and pushes into the bounded queue.
class CommandIngress {
 public:
  CommandIngress(const LinkConfig& cfg, std::uint64_t seed, const SimClock& clock,
                 CommandQueue& queue);

  /// Receipt is the current published sim time.
  TimedCommand submit(std::uint32_t client, const Command& c);
  TimedCommand submit_at(std::uint32_t client, const Command& c, SimTime receipt);

  std::uint32_t new_client_id() { return next_client_.fetch_add(1) + 1; }

 private:
  LatencyModel latency_;
  const SimClock& clock_;
  CommandQueue& queue_;
  std::atomic<std::uint64_t> sequence_{0};
  std::atomic<std::uint32_t> next_client_{0};
};

}  // namespace sbr::teleop
