#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "marksim/aqm.hpp"
#include "marksim/engine.hpp"
#include "marksim/packet.hpp"
#include "marksim/trace.hpp"

namespace marksim {

// Anything that accepts packets: links, forwarding nodes, markers, sinks.
class PacketHandler {
 public:
  virtual ~PacketHandler() = default;
  virtual void handle(Packet pkt, SimTime now) = 0;
};

struct LinkStats {
  std::uint64_t injected = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

// Unidirectional link: a queue discipline feeding a single serializing
// server, then fixed propagation delay. Packets leave in FIFO order of
// dequeue; a packet dequeued at t arrives at t + size*8/bandwidth + delay.
class Link final : public PacketHandler {
 public:
  Link(Simulator& sim, std::string name, double bandwidth_bps, SimTime delay_s,
       std::unique_ptr<QueueDisc> queue, PacketHandler* next, TraceLog* trace = nullptr);

  void handle(Packet pkt, SimTime now) override;

  static SimTime serialization_delay(std::int64_t size_bytes, double bandwidth_bps) {
    return static_cast<double>(size_bytes) * 8.0 / bandwidth_bps;
  }

  const LinkStats& stats() const { return stats_; }
  const std::string& name() const { return name_; }
  const QueueDisc& queue() const { return *queue_; }

  // injected == delivered + dropped + still inside (queued, serializing, propagating)
  bool conserves() const {
    return stats_.injected == stats_.delivered + stats_.dropped + queue_->size_pkts() +
                                  (busy_ ? 1 : 0) + propagating_;
  }

  // Invoked on packets the queue refuses (core-drop accounting).
  std::function<void(const Packet&, SimTime)> on_drop;

 private:
  void start_service(SimTime now);

  Simulator& sim_;
  std::string name_;
  double bandwidth_bps_;
  SimTime delay_s_;
  std::unique_ptr<QueueDisc> queue_;
  PacketHandler* next_;
  TraceLog* trace_;
  LinkStats stats_;
  bool busy_ = false;
  std::uint64_t propagating_ = 0;
};

}  // namespace marksim
