#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <vector>

#include "sbr/command.hpp"

namespace sbr {

/// Simulation clock. Integer nanoseconds keep tick and latency arithmetic
/// exact.
using SimTime = std::chrono::duration<std::int64_t, std::nano>;

SimTime from_seconds(double seconds);
double to_seconds(SimTime t);

/// A live command waiting for its delayed arrival at the robot.
struct TimedCommand {
  SimTime apply_at{0};
  SimTime received_at{0};
  std::uint32_t client = 0;
  std::uint64_t sequence = 0;  // global arrival order, breaks ties
  Command command;
};

/// Bounded multi-producer queue drained by the simulation thread. Producers
/// never block; when full the oldest entry is dropped and counted.
class CommandQueue {
 public:
  explicit CommandQueue(std::size_t capacity = 256);

  void push(TimedCommand c);

  /// Removes and returns every entry with apply_at <= now, ordered by
  /// (apply_at, sequence).
  std::vector<TimedCommand> drain_due(SimTime now);

  std::uint64_t dropped() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::deque<TimedCommand> items_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
};

}  // namespace sbr
