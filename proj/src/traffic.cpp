#include "marksim/traffic.hpp"

#include <stdexcept>

namespace marksim {

UdpCbrSource::UdpCbrSource(Simulator& sim, FlowId flow, double rate_bps, int pkt_size_bytes,
                           SimTime start, SimTime stop, PacketHandler* out)
    : sim_(sim), flow_(flow), rate_bps_(rate_bps), pkt_size_(pkt_size_bytes), start_(start),
      stop_(stop), gap_(cbr_gap_seconds(rate_bps, pkt_size_bytes)), out_(out) {
  if (rate_bps_ <= 0.0) throw std::invalid_argument("cbr: rate must be > 0");
  if (pkt_size_ <= 0) throw std::invalid_argument("cbr: packet size must be > 0");
  if (start_ < stop_) {
    sim_.schedule(start_, [this] { emit(0); });
  }
}

void UdpCbrSource::emit(std::int64_t n) {
  const SimTime now = sim_.now();
  Packet pkt;
  pkt.flow = flow_;
  pkt.kind = PacketKind::Udp;
  pkt.size_bytes = pkt_size_;
  pkt.payload_bytes = pkt_size_;
  pkt.seq = n;
  pkt.created = now;
  if (on_emit) on_emit(pkt, now);
  ++emitted_;
  out_->handle(pkt, now);

  const SimTime next = cbr_emission_time(start_, gap_, n + 1);
  if (next < stop_) {
    sim_.schedule(next, [this, n] { emit(n + 1); });
  }
}

std::vector<SimTime> poisson_schedule(Rng& rng, double mean_interarrival_s, SimTime start,
                                      SimTime stop) {
  if (mean_interarrival_s <= 0.0) throw std::invalid_argument("poisson: mean must be > 0");
  std::vector<SimTime> times;
  SimTime t = start;
  while (true) {
    t += rng.exponential(mean_interarrival_s);
    if (t >= stop) break;
    times.push_back(t);
  }
  return times;
}

}  // namespace marksim
