#include "sbr/command_queue.hpp"

#include <algorithm>
#include <cmath>

namespace sbr {

SimTime from_seconds(double seconds) {
  return SimTime(static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

double to_seconds(SimTime t) { return static_cast<double>(t.count()) * 1e-9; }

CommandQueue::CommandQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(1, capacity)) {}

void CommandQueue::push(TimedCommand c) {
  std::lock_guard lock(mutex_);
  if (items_.size() >= capacity_) {
    items_.pop_front();
    ++dropped_;
  }
  items_.push_back(std::move(c));
}

std::vector<TimedCommand> CommandQueue::drain_due(SimTime now) {
  std::vector<TimedCommand> due;
  {
    std::lock_guard lock(mutex_);
    auto keep = std::stable_partition(items_.begin(), items_.end(),
                                      [now](const TimedCommand& c) { return c.apply_at > now; });
    due.assign(std::make_move_iterator(keep), std::make_move_iterator(items_.end()));
    items_.erase(keep, items_.end());
  }
  std::stable_sort(due.begin(), due.end(), [](const TimedCommand& a, const TimedCommand& b) {
    if (a.apply_at != b.apply_at) return a.apply_at < b.apply_at;
    return a.sequence < b.sequence;
  });
  return due;
}

std::uint64_t CommandQueue::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

std::size_t CommandQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

}  // namespace sbr
