#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string_view>

#include "marksim/packet.hpp"
#include "marksim/rng.hpp"

namespace marksim {

struct RedParams {
  double min_th_pkts = 0.0;
  double max_th_pkts = 0.0;
  double max_p = 1.0;
  double ewma_weight = 0.002;

  bool operator==(const RedParams&) const = default;
};

// Piecewise-linear early-drop curve over the averaged queue length:
// 0 below min_th, ramp to max_p, then 1 at or above max_th.
double red_drop_probability(double avg_pkts, const RedParams& params);

// FIFO queue discipline attached to a link's transmit side.
class QueueDisc {
 public:
  virtual ~QueueDisc() = default;
  // False means the packet was dropped at the queue.
  virtual bool enqueue(const Packet& pkt, SimTime now) = 0;
  virtual std::optional<Packet> dequeue(SimTime now) = 0;
  virtual std::size_t size_pkts() const = 0;
  virtual std::string_view discipline() const = 0;
};

class DropTailQueue final : public QueueDisc {
 public:
  explicit DropTailQueue(std::size_t capacity_pkts) : capacity_(capacity_pkts) {}
  bool enqueue(const Packet& pkt, SimTime now) override;
  std::optional<Packet> dequeue(SimTime now) override;
  std::size_t size_pkts() const override { return buf_.size(); }
  std::string_view discipline() const override { return "droptail"; }

 private:
  std::size_t capacity_;
  std::deque<Packet> buf_;
};

// Single-curve RED over all arrivals. `idle_pkts_per_sec` is the service rate
// used to age the average across idle gaps (as if that many empty-queue
// samples had been taken); zero disables aging.
class RedQueue final : public QueueDisc {
 public:
  RedQueue(std::size_t capacity_pkts, RedParams params, Rng rng, double idle_pkts_per_sec = 0.0)
      : capacity_(capacity_pkts), params_(params), rng_(rng), idle_rate_(idle_pkts_per_sec) {}
  bool enqueue(const Packet& pkt, SimTime now) override;
  std::optional<Packet> dequeue(SimTime now) override;
  std::size_t size_pkts() const override { return buf_.size(); }
  std::string_view discipline() const override { return "red"; }
  double avg_pkts() const { return avg_; }

 private:
  std::size_t capacity_;
  RedParams params_;
  Rng rng_;
  double idle_rate_;
  double avg_ = 0.0;
  SimTime idle_since_ = -1.0;
  std::deque<Packet> buf_;
};

// Two-curve preferential dropper: In packets are tested against the average
// count of queued In packets, everything else against the average total
// occupancy. With the Out thresholds below the In thresholds, low-priority
// traffic is shed well before high-priority traffic feels any pressure.
// Background-marked packets take the Out curve.
class RioQueue final : public QueueDisc {
 public:
  RioQueue(std::size_t capacity_pkts, RedParams in_params, RedParams out_params, Rng rng,
           double idle_pkts_per_sec = 0.0)
      : capacity_(capacity_pkts), in_params_(in_params), out_params_(out_params), rng_(rng),
        idle_rate_(idle_pkts_per_sec) {}
  bool enqueue(const Packet& pkt, SimTime now) override;
  std::optional<Packet> dequeue(SimTime now) override;
  std::size_t size_pkts() const override { return buf_.size(); }
  std::string_view discipline() const override { return "rio"; }
  double avg_in() const { return avg_in_; }
  double avg_total() const { return avg_total_; }

 private:
  std::size_t capacity_;
  RedParams in_params_;
  RedParams out_params_;
  Rng rng_;
  double idle_rate_;
  double avg_in_ = 0.0;
  double avg_total_ = 0.0;
  SimTime idle_since_ = -1.0;
  std::size_t in_count_ = 0;
  std::deque<Packet> buf_;
};

}  // namespace marksim
