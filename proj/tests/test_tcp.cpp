#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "marksim/link.hpp"
#include "marksim/tcp.hpp"

using namespace marksim;

namespace {

// Captures everything a sender emits without forwarding it.
class Capture final : public PacketHandler {
 public:
  void handle(Packet pkt, SimTime now) override {
    (void)now;
    packets.push_back(pkt);
  }
  std::vector<Packet> packets;
};

Packet ack_packet(FlowId flow, std::int64_t ack) {
  Packet p;
  p.flow = flow;
  p.kind = PacketKind::TcpAck;
  p.size_bytes = 40;
  p.ack = ack;
  return p;
}

}  // namespace

TEST_CASE("slow start doubles per acked window: first ack moves cwnd 1 -> 2") {
  Simulator sim;
  Capture wire;
  TcpSender tcp(sim, 0, TcpParams{}, &wire, -1, 0.0);
  sim.run_until(0.0);
  REQUIRE(wire.packets.size() == 1);  // cwnd = 1
  CHECK(tcp.cwnd_segments() == doctest::Approx(1.0));
  tcp.on_ack(ack_packet(0, 1000), 0.05);
  CHECK(tcp.cwnd_segments() == doctest::Approx(2.0));
  CHECK(wire.packets.size() == 3);  // window opened by two segments
}

TEST_CASE("congestion avoidance adds 1/cwnd per ack") {
  Simulator sim;
  Capture wire;
  TcpParams params;
  params.initial_ssthresh_segments = 2.0;  // leave slow start immediately
  TcpSender tcp(sim, 0, params, &wire, -1, 0.0);
  sim.run_until(0.0);
  // grow cwnd to 10 via repeated acks
  std::int64_t acked = 0;
  while (tcp.cwnd_segments() < 10.0 - 1e-9) {
    acked += 1000;
    tcp.on_ack(ack_packet(0, acked), 0.01 + 0.0001 * acked / 1000);
  }
  const double cwnd = tcp.cwnd_segments();
  acked += 1000;
  tcp.on_ack(ack_packet(0, acked), 1.0);
  CHECK(tcp.cwnd_segments() == doctest::Approx(cwnd + 1.0 / cwnd));
  // spec anchor: at exactly cwnd = 10 one ack yields 10.1
  CHECK((10.0 + 1.0 / 10.0) == doctest::Approx(10.1));
}

TEST_CASE("three dup acks trigger one fast retransmit with ssthresh = cwnd/2") {
  Simulator sim;
  Capture wire;
  TcpParams params;
  params.initial_ssthresh_segments = 1e9;
  TcpSender tcp(sim, 0, params, &wire, -1, 0.0);
  sim.run_until(0.0);
  // ack up through cwnd = 16
  std::int64_t acked = 0;
  while (tcp.cwnd_segments() < 16.0 - 1e-9) {
    acked += 1000;
    tcp.on_ack(ack_packet(0, acked), 0.01 * (acked / 1000));
  }
  REQUIRE(tcp.cwnd_segments() == doctest::Approx(16.0));
  const std::size_t sent_before = wire.packets.size();

  tcp.on_ack(ack_packet(0, acked), 2.0);  // dup 1
  tcp.on_ack(ack_packet(0, acked), 2.0);  // dup 2
  CHECK(wire.packets.size() == sent_before);
  tcp.on_ack(ack_packet(0, acked), 2.0);  // dup 3 -> retransmit
  CHECK(tcp.ssthresh_segments() == doctest::Approx(8.0));
  CHECK(tcp.in_recovery());
  CHECK(tcp.fast_retransmits() == 1);
  REQUIRE(wire.packets.size() == sent_before + 1);
  const Packet& rtx = wire.packets.back();
  CHECK(rtx.seq == acked);
  CHECK(rtx.retransmit);
  CHECK(tcp.cwnd_segments() == doctest::Approx(8.0 + 3.0));

  // a new ack deflates back to ssthresh
  tcp.on_ack(ack_packet(0, acked + 1000), 2.1);
  CHECK_FALSE(tcp.in_recovery());
  CHECK(tcp.cwnd_segments() == doctest::Approx(8.0));
}

TEST_CASE("timeout collapses the window and backs off the timer") {
  Simulator sim;
  Capture wire;
  TcpSender tcp(sim, 0, TcpParams{}, &wire, -1, 0.0);
  sim.run_until(0.0);
  std::int64_t acked = 0;
  while (tcp.cwnd_segments() < 20.0 - 1e-9) {
    acked += 1000;
    tcp.on_ack(ack_packet(0, acked), 0.001 * (acked / 1000));
  }
  const double cwnd_at_timeout = tcp.cwnd_segments();
  REQUIRE(cwnd_at_timeout == doctest::Approx(20.0).epsilon(0.01));
  CHECK(tcp.rto_s() == doctest::Approx(TcpParams{}.rto_min_s).epsilon(0.01));  // floored

  tcp.on_rto(5.0);
  CHECK(tcp.ssthresh_segments() == doctest::Approx(cwnd_at_timeout / 2.0));
  CHECK(tcp.cwnd_segments() == 1.0);
  CHECK(tcp.in_slow_start());
  CHECK(tcp.timeouts() == 1);
  CHECK(wire.packets.back().retransmit);
  CHECK(wire.packets.back().seq == acked);
}

TEST_CASE("consecutive timeouts double the timer up to the cap") {
  Simulator sim;
  Capture wire;
  TcpParams params;
  params.rto_initial_s = 1.0;
  TcpSender tcp(sim, 0, params, &wire, -1, 0.0);
  sim.run_until(0.0);
  CHECK(tcp.rto_s() == doctest::Approx(1.0));
  double t = 1.0;
  std::vector<double> expected{2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 64.0, 64.0};
  for (double e : expected) {
    tcp.on_rto(t);
    t += tcp.rto_s();
    CHECK(tcp.rto_s() == doctest::Approx(e));
  }
}

TEST_CASE("receiver delivers bytes contiguously and without duplication") {
  Simulator sim;
  Capture acks;
  TcpReceiver rx(0, 40, &acks);
  std::int64_t delivered = 0;
  rx.on_deliver = [&](std::int64_t n, SimTime) { delivered += n; };

  auto data = [](std::int64_t seq, int len) {
    Packet p;
    p.flow = 0;
    p.kind = PacketKind::TcpData;
    p.seq = seq;
    p.size_bytes = len;
    p.payload_bytes = len;
    return p;
  };

  rx.on_data(data(0, 1000), 0.0);
  CHECK(delivered == 1000);
  CHECK(acks.packets.back().ack == 1000);

  rx.on_data(data(2000, 1000), 0.1);  // gap: held back
  CHECK(delivered == 1000);
  CHECK(acks.packets.back().ack == 1000);  // dup ack

  rx.on_data(data(2000, 1000), 0.2);  // duplicate of the held segment
  CHECK(delivered == 1000);

  rx.on_data(data(1000, 1000), 0.3);  // plugs the hole
  CHECK(delivered == 3000);
  CHECK(acks.packets.back().ack == 3000);

  rx.on_data(data(500, 1000), 0.4);  // overlaps already-delivered bytes
  CHECK(delivered == 3000);
  CHECK(acks.packets.back().ack == 3000);
}

namespace {

struct Indirect final : PacketHandler {
  PacketHandler* target = nullptr;
  void handle(Packet pkt, SimTime now) override { target->handle(pkt, now); }
};

// Two-link loopback: sender -> data link -> receiver -> ack link -> sender.
struct Loop {
  Simulator sim;
  Indirect to_sender;
  std::unique_ptr<Link> ack_link;
  std::unique_ptr<TcpReceiver> rx;
  std::unique_ptr<Link> data_link;
  std::unique_ptr<TcpSender> tcp;
  std::int64_t delivered = 0;

  Loop(double bw_bps, std::size_t queue_pkts, std::int64_t payload) {
    ack_link = std::make_unique<Link>(sim, "ack", 1e7, 0.01, std::make_unique<DropTailQueue>(1000),
                                      &to_sender);
    rx = std::make_unique<TcpReceiver>(0, 40, ack_link.get());
    rx->on_deliver = [this](std::int64_t n, SimTime) { delivered += n; };
    data_link = std::make_unique<Link>(sim, "data", bw_bps, 0.01,
                                       std::make_unique<DropTailQueue>(queue_pkts), rx.get());
    tcp = std::make_unique<TcpSender>(sim, 0, TcpParams{}, data_link.get(), payload, 0.0);
    to_sender.target = tcp.get();
  }
};

}  // namespace

TEST_CASE("a lone flow on a lossless path sees no timeouts and fills the pipe") {
  Loop loop(5e6, 100000, -1);  // effectively infinite buffer: lossless
  loop.sim.run_until(20.0);
  CHECK(loop.tcp->timeouts() == 0);
  CHECK(loop.tcp->fast_retransmits() == 0);
  // >= 90% of 5 Mb/s over the run, slow start included
  CHECK(loop.delivered * 8.0 / 20.0 >= 0.9 * 5e6);
}

TEST_CASE("new data is sent only within the window") {
  Loop loop(2e6, 50, -1);
  std::int64_t prev_outstanding = 0;
  for (int step = 0; step < 20000; ++step) {
    if (!loop.sim.run_one()) break;
    const std::int64_t outstanding = loop.tcp->outstanding_bytes();
    if (outstanding > prev_outstanding) {
      // grew: the send respected ceil(cwnd) segments at the send instant
      const double cap = std::min(std::ceil(loop.tcp->cwnd_segments()), 64.0) * 1000.0;
      CHECK(outstanding <= static_cast<std::int64_t>(cap));
    }
    prev_outstanding = outstanding;
  }
}

TEST_CASE("bounded transfer completes exactly") {
  Loop loop(5e6, 1000, 20480);
  bool completed = false;
  loop.tcp->on_complete = [&](SimTime) { completed = true; };
  loop.sim.run_until(10.0);
  CHECK(completed);
  CHECK(loop.tcp->finished());
  CHECK(loop.delivered == 20480);
  CHECK(loop.rx->delivered_bytes() == 20480);
}
