#pragma once

#include <functional>
#include <vector>

#include "marksim/engine.hpp"
#include "marksim/link.hpp"
#include "marksim/packet.hpp"
#include "marksim/rng.hpp"

namespace marksim {

// Inter-packet gap of a constant-bit-rate source.
inline double cbr_gap_seconds(double rate_bps, int pkt_size_bytes) {
  return static_cast<double>(pkt_size_bytes) * 8.0 / rate_bps;
}

// n-th emission instant of a CBR source.
inline SimTime cbr_emission_time(SimTime start, double gap_s, std::int64_t n) {
  return start + static_cast<double>(n) * gap_s;
}

// Constant-bit-rate UDP source: exact spacing, no jitter; emits packet n at
// start + n*gap while that instant is before `stop`.
class UdpCbrSource {
 public:
  UdpCbrSource(Simulator& sim, FlowId flow, double rate_bps, int pkt_size_bytes, SimTime start,
               SimTime stop, PacketHandler* out);

  // Called for every packet emitted (ingress stamping, accounting).
  std::function<void(Packet&, SimTime)> on_emit;

  std::int64_t emitted() const { return emitted_; }
  double rate_bps() const { return rate_bps_; }

 private:
  void emit(std::int64_t n);

  Simulator& sim_;
  FlowId flow_;
  double rate_bps_;
  int pkt_size_;
  SimTime start_;
  SimTime stop_;
  double gap_;
  PacketHandler* out_;
  std::int64_t emitted_ = 0;
};

// Session start times of a Poisson arrival process over [start, stop).
// Draws exactly one exponential per session, in order, so the schedule is a
// pure function of the stream handed in.
std::vector<SimTime> poisson_schedule(Rng& rng, double mean_interarrival_s, SimTime start,
                                      SimTime stop);

}  // namespace marksim
