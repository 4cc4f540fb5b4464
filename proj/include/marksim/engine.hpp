#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "marksim/packet.hpp"

namespace marksim {

class Simulator;

// Permits cancellation of a scheduled event (TCP retransmission timers).
class EventHandle {
 public:
  EventHandle() = default;
  bool valid() const { return id_ != 0; }

 private:
  friend class Simulator;
  explicit EventHandle(std::uint64_t id) : id_(id) {}
  std::uint64_t id_ = 0;
};

// Deterministic single-threaded event loop. Events fire in (time, insertion)
// order: simultaneous events dispatch strictly in the order they were
// scheduled, which makes whole runs reproducible from a seed alone.
class Simulator {
 public:
  SimTime now() const { return now_; }

  // Schedules `fn` to fire exactly once at `at`. Scheduling in the past is an
  // error; scheduling at the current time fires after the running event.
  EventHandle schedule(SimTime at, std::function<void()> fn);

  // A cancelled event never fires. Cancelling an already-fired or already
  // cancelled event is a no-op.
  void cancel(EventHandle h);

  // Processes every pending event with time <= end, in order, and advances
  // the clock to end. Returns the final clock value.
  SimTime run_until(SimTime end);

  // Dispatches the single earliest pending event, if any.
  bool run_one();

  std::uint64_t dispatched() const { return dispatched_; }
  std::size_t pending() const { return callbacks_.size(); }

 private:
  struct Entry {
    SimTime at;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.seq > b.seq;
    }
  };

  bool dispatch_next();

  SimTime now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::unordered_map<std::uint64_t, std::function<void()>> callbacks_;
};

}  // namespace marksim
