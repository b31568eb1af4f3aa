#include "sbr/teleop/broadcast.hpp"

#include <algorithm>

namespace sbr::teleop {

void Subscription::offer(const TelemetryFrame& f) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (frames_.size() >= capacity_) {
      frames_.pop_front();
      ++dropped_;
    }
    frames_.push_back(f);
  }
  ready_.notify_one();
}

std::optional<TelemetryFrame> Subscription::try_pop() {
  std::lock_guard lock(mutex_);
  if (frames_.empty()) return std::nullopt;
  TelemetryFrame f = frames_.front();
  frames_.pop_front();
  return f;
}

std::optional<TelemetryFrame> Subscription::pop_for(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  ready_.wait_for(lock, timeout, [&] { return !frames_.empty() || closed_; });
  if (frames_.empty()) return std::nullopt;
  TelemetryFrame f = frames_.front();
  frames_.pop_front();
  return f;
}

void Subscription::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::uint64_t Subscription::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::shared_ptr<Subscription> TelemetryBroadcast::subscribe(std::size_t capacity) {
  auto sub = std::make_shared<Subscription>(std::max<std::size_t>(capacity, 1));
  std::lock_guard lock(mutex_);
  if (closed_) {
    sub->close();
  } else {
    subs_.push_back(sub);
  }
  return sub;
}

void TelemetryBroadcast::publish(const TelemetryFrame& f) {
  std::lock_guard lock(mutex_);
  std::erase_if(subs_, [&](const std::weak_ptr<Subscription>& w) {
    auto s = w.lock();
    if (!s) return true;
    s->offer(f);
    return false;
  });
}

void TelemetryBroadcast::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
  for (auto& w : subs_) {
    if (auto s = w.lock()) s->close();
  }
  subs_.clear();
}

std::size_t TelemetryBroadcast::subscriber_count() const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(
      subs_.begin(), subs_.end(), [](const auto& w) { return !w.expired(); }));
}

}  // namespace sbr::teleop
