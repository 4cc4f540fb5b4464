#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "marksim/engine.hpp"
#include "marksim/link.hpp"
#include "marksim/packet.hpp"

namespace marksim {

struct TcpParams {
  int mss_bytes = 1000;
  int ack_size_bytes = 40;
  double initial_cwnd_segments = 1.0;
  double initial_ssthresh_segments = 16.0;
  int max_window_segments = 64;
  int dupack_threshold = 3;
  double rto_initial_s = 1.0;
  double rto_min_s = 1.0;
  double rto_max_s = 64.0;
};

// Reno sender: slow start, congestion avoidance, fast retransmit/recovery,
// and a Jacobson/Karels retransmission timer with exponential backoff and
// Karn's rule for samples. The receiver window is effectively unbounded; the
// send window is cwnd (capped at max_window_segments).
class TcpSender final : public PacketHandler {
 public:
  // payload_bytes < 0 means an unbounded bulk transfer; otherwise the sender
  // stops after exactly payload_bytes and reports completion once fully acked.
  TcpSender(Simulator& sim, FlowId flow, TcpParams params, PacketHandler* out,
            std::int64_t payload_bytes, SimTime start);

  // Called for every data packet emitted (ingress stamping, accounting).
  std::function<void(Packet&, SimTime)> on_emit;
  // Called once when a bounded transfer is fully acknowledged.
  std::function<void(SimTime)> on_complete;

  // Ack path delivery.
  void handle(Packet pkt, SimTime now) override { on_ack(pkt, now); }
  void on_ack(const Packet& ack, SimTime now);

  double cwnd_segments() const { return cwnd_; }
  double ssthresh_segments() const { return ssthresh_; }
  std::int64_t highest_acked() const { return highest_acked_; }
  std::int64_t next_seq() const { return next_seq_; }
  std::int64_t outstanding_bytes() const { return next_seq_ - highest_acked_; }
  bool in_recovery() const { return in_recovery_; }
  bool in_slow_start() const { return cwnd_ < ssthresh_; }
  bool finished() const { return finished_; }
  int timeouts() const { return timeouts_; }
  int fast_retransmits() const { return fast_retransmits_; }
  double rto_s() const { return rto_cur_; }
  double srtt_s() const { return srtt_; }
  FlowId flow() const { return flow_; }

  // Retransmission timer expiry (public so unit traces can drive it directly).
  void on_rto(SimTime now);

 private:
  void start(SimTime now);
  void try_send(SimTime now);
  void send_segment(std::int64_t seq, int len, bool rtx, SimTime now);
  int segment_len(std::int64_t seq) const;
  bool data_remaining() const { return payload_bytes_ < 0 || next_seq_ < payload_bytes_; }
  void arm_rto(SimTime now);
  void finish(SimTime now);

  Simulator& sim_;
  FlowId flow_;
  TcpParams p_;
  PacketHandler* out_;
  std::int64_t payload_bytes_;

  double cwnd_;
  double ssthresh_;
  std::int64_t next_seq_ = 0;
  std::int64_t highest_acked_ = 0;
  int dup_acks_ = 0;
  bool in_recovery_ = false;
  std::int64_t recover_ = 0;

  double srtt_ = -1.0;
  double rttvar_ = 0.0;
  double rto_base_;
  double rto_cur_;
  std::int64_t rtt_seq_ = -1;  // byte whose ack closes the current RTT sample
  SimTime rtt_sent_ = 0.0;
  EventHandle rto_timer_;

  bool finished_ = false;
  int timeouts_ = 0;
  int fast_retransmits_ = 0;
};

// Receiver side: reassembles the byte stream, acknowledges cumulatively on
// every data packet, and reports only newly contiguous payload bytes.
class TcpReceiver final : public PacketHandler {
 public:
  TcpReceiver(FlowId flow, int ack_size_bytes, PacketHandler* ack_out);

  // Called with the count of newly contiguous bytes whenever delivery advances.
  std::function<void(std::int64_t, SimTime)> on_deliver;

  void handle(Packet pkt, SimTime now) override { on_data(pkt, now); }
  void on_data(const Packet& pkt, SimTime now);

  std::int64_t delivered_bytes() const { return cum_; }

 private:
  FlowId flow_;
  int ack_size_;
  PacketHandler* ack_out_;
  std::int64_t cum_ = 0;
  std::map<std::int64_t, std::int64_t> out_of_order_;  // start -> end
};

}  // namespace marksim
