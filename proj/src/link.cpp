#include "marksim/link.hpp"

#include <stdexcept>
#include <utility>

namespace marksim {

Link::Link(Simulator& sim, std::string name, double bandwidth_bps, SimTime delay_s,
           std::unique_ptr<QueueDisc> queue, PacketHandler* next, TraceLog* trace)
    : sim_(sim), name_(std::move(name)), bandwidth_bps_(bandwidth_bps), delay_s_(delay_s),
      queue_(std::move(queue)), next_(next), trace_(trace) {
  if (bandwidth_bps_ <= 0.0) throw std::invalid_argument("link " + name_ + ": bandwidth must be > 0");
  if (delay_s_ < 0.0) throw std::invalid_argument("link " + name_ + ": delay must be >= 0");
  if (!queue_) throw std::invalid_argument("link " + name_ + ": queue required");
  if (!next_) throw std::invalid_argument("link " + name_ + ": next hop required");
}

void Link::handle(Packet pkt, SimTime now) {
  ++stats_.injected;
  if (!queue_->enqueue(pkt, now)) {
    ++stats_.dropped;
    if (trace_) trace_->emit(now, name_, "drop", pkt.flow, pkt.seq);
    if (on_drop) on_drop(pkt, now);
    return;
  }
  if (!busy_) start_service(now);
}

void Link::start_service(SimTime now) {
  auto pkt = queue_->dequeue(now);
  if (!pkt) return;
  busy_ = true;
  const SimTime tx_done = now + serialization_delay(pkt->size_bytes, bandwidth_bps_);
  sim_.schedule(tx_done, [this, p = *pkt]() {
    const SimTime t = sim_.now();
    busy_ = false;
    ++propagating_;
    sim_.schedule(t + delay_s_, [this, p]() {
      --propagating_;
      ++stats_.delivered;
      if (trace_) trace_->emit(sim_.now(), name_, "deliver", p.flow, p.seq);
      next_->handle(p, sim_.now());
    });
    start_service(t);
  });
}

}  // namespace marksim
