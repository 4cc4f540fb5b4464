#pragma once

#include <cstdint>

namespace marksim {

// Simulation clock, in seconds.
using SimTime = double;

// Opaque per-flow identity, unique within one run and never reused.
using FlowId = std::int32_t;

// Drop priority assigned by the edge marker. Background keeps the aggregate
// that exists only to desynchronize the foreground flows out of the token
// accounting; the core treats it like Out.
enum class Mark : std::uint8_t { Unmarked, In, Out, Background };

enum class PacketKind : std::uint8_t { TcpData, TcpAck, Udp };

struct Packet {
  FlowId flow = -1;
  PacketKind kind = PacketKind::TcpData;
  std::int32_t size_bytes = 0;      // bytes on the wire
  std::int32_t payload_bytes = 0;   // data bytes carried (TCP data / UDP)
  std::int64_t seq = 0;             // first payload byte (TCP) or emission index (UDP)
  std::int64_t ack = -1;            // cumulative ack (TCP ack packets)
  bool retransmit = false;
  double stamped_rate_bps = -1.0;   // flow rate written at the ingress; < 0 = absent
  Mark mark = Mark::Unmarked;
  SimTime created = 0.0;
};

inline bool has_stamped_rate(const Packet& p) { return p.stamped_rate_bps >= 0.0; }

inline const char* mark_name(Mark m) {
  switch (m) {
    case Mark::In: return "in";
    case Mark::Out: return "out";
    case Mark::Background: return "bg";
    default: return "none";
  }
}

}  // namespace marksim
