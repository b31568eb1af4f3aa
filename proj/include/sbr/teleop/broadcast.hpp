#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "sbr/simloop.hpp"

namespace sbr::teleop {

/// One subscriber's bounded mailbox. When full, the oldest frame is
/// discarded so a slow reader never holds up the publisher.
class Subscription {
 public:
  explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

  void offer(const TelemetryFrame& f);
  std::optional<TelemetryFrame> try_pop();
  std::optional<TelemetryFrame> pop_for(std::chrono::milliseconds timeout);
  void close();

  bool closed() const;
  std::uint64_t dropped() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<TelemetryFrame> frames_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

class TelemetryBroadcast {
 public:
  std::shared_ptr<Subscription> subscribe(std::size_t capacity = 512);
  void publish(const TelemetryFrame& f);
  /// Closes every subscription; later subscribers start closed.
  void close();
  std::size_t subscriber_count() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  bool closed_ = false;
};

}  // namespace sbr::teleop
