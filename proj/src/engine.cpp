#include "marksim/engine.hpp"

#include <stdexcept>
#include <string>

namespace marksim {

EventHandle Simulator::schedule(SimTime at, std::function<void()> fn) {
  if (at < now_) {
    throw std::invalid_argument("schedule: t=" + std::to_string(at) +
                                " is in the past (now=" + std::to_string(now_) + ")");
  }
  const std::uint64_t seq = ++next_seq_;
  callbacks_.emplace(seq, std::move(fn));
  heap_.push(Entry{at, seq});
  return EventHandle(seq);
}

void Simulator::cancel(EventHandle h) {
  if (h.valid()) callbacks_.erase(h.id_);
}

bool Simulator::dispatch_next() {
  while (!heap_.empty()) {
    const Entry e = heap_.top();
    heap_.pop();
    auto it = callbacks_.find(e.seq);
    if (it == callbacks_.end()) continue;  // cancelled
    if (e.at < now_) throw std::logic_error("event queue: clock regression");
    now_ = e.at;
    auto fn = std::move(it->second);
    callbacks_.erase(it);
    ++dispatched_;
    fn();
    return true;
  }
  return false;
}

SimTime Simulator::run_until(SimTime end) {
  while (!heap_.empty() && heap_.top().at <= end) {
    if (!dispatch_next()) break;
  }
  if (end > now_) now_ = end;
  return now_;
}

bool Simulator::run_one() { return dispatch_next(); }

}  // namespace marksim
