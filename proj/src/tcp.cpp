#include "marksim/tcp.hpp"

#include <algorithm>
#include <cmath>

namespace marksim {

TcpSender::TcpSender(Simulator& sim, FlowId flow, TcpParams params, PacketHandler* out,
                     std::int64_t payload_bytes, SimTime start)
    : sim_(sim), flow_(flow), p_(params), out_(out), payload_bytes_(payload_bytes),
      cwnd_(params.initial_cwnd_segments), ssthresh_(params.initial_ssthresh_segments),
      rto_base_(params.rto_initial_s), rto_cur_(params.rto_initial_s) {
  sim_.schedule(start, [this] { this->start(sim_.now()); });
}

void TcpSender::start(SimTime now) { try_send(now); }

int TcpSender::segment_len(std::int64_t seq) const {
  if (payload_bytes_ < 0) return p_.mss_bytes;
  return static_cast<int>(std::min<std::int64_t>(p_.mss_bytes, payload_bytes_ - seq));
}

void TcpSender::try_send(SimTime now) {
  if (finished_) return;
  const std::int64_t window =
      std::min<std::int64_t>(static_cast<std::int64_t>(cwnd_ * p_.mss_bytes),
                             static_cast<std::int64_t>(p_.max_window_segments) * p_.mss_bytes);
  while (data_remaining()) {
    const int len = segment_len(next_seq_);
    const std::int64_t in_flight = next_seq_ - highest_acked_;
    if (in_flight > 0 && in_flight + len > window) break;
    send_segment(next_seq_, len, false, now);
    next_seq_ += len;
  }
}

void TcpSender::send_segment(std::int64_t seq, int len, bool rtx, SimTime now) {
  Packet pkt;
  pkt.flow = flow_;
  pkt.kind = PacketKind::TcpData;
  pkt.size_bytes = len;
  pkt.payload_bytes = len;
  pkt.seq = seq;
  pkt.retransmit = rtx;
  pkt.created = now;

  if (rtx) {
    // Karn: a retransmission poisons any sample covering that range.
    if (rtt_seq_ >= 0 && seq < rtt_seq_) rtt_seq_ = -1;
  } else if (rtt_seq_ < 0) {
    rtt_seq_ = seq + len;
    rtt_sent_ = now;
  }

  if (on_emit) on_emit(pkt, now);
  out_->handle(pkt, now);
  if (!rto_timer_.valid()) arm_rto(now);
}

void TcpSender::arm_rto(SimTime now) {
  sim_.cancel(rto_timer_);
  rto_timer_ = sim_.schedule(now + rto_cur_, [this] { this->on_rto(sim_.now()); });
}

void TcpSender::on_ack(const Packet& ack, SimTime now) {
  if (finished_) return;
  const std::int64_t acked = ack.ack;
  if (acked > highest_acked_) {
    if (rtt_seq_ >= 0 && acked >= rtt_seq_) {
      const double sample = now - rtt_sent_;
      rtt_seq_ = -1;
      if (srtt_ < 0.0) {
        srtt_ = sample;
        rttvar_ = sample / 2.0;
      } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(srtt_ - sample);
        srtt_ = 0.875 * srtt_ + 0.125 * sample;
      }
      rto_base_ = std::clamp(srtt_ + 4.0 * rttvar_, p_.rto_min_s, p_.rto_max_s);
      rto_cur_ = rto_base_;
    }

    highest_acked_ = acked;
    dup_acks_ = 0;
    if (in_recovery_) {
      cwnd_ = ssthresh_;  // deflate on leaving recovery
      in_recovery_ = false;
    } else if (cwnd_ < ssthresh_) {
      cwnd_ += 1.0;
    } else {
      cwnd_ += 1.0 / cwnd_;
    }

    if (payload_bytes_ >= 0 && highest_acked_ >= payload_bytes_) {
      finish(now);
      return;
    }
    if (outstanding_bytes() > 0 || data_remaining()) {
      arm_rto(now);
    } else {
      sim_.cancel(rto_timer_);
      rto_timer_ = EventHandle{};
    }
    try_send(now);
  } else if (acked == highest_acked_ && outstanding_bytes() > 0) {
    ++dup_acks_;
    if (in_recovery_) {
      cwnd_ += 1.0;  // inflation: each dup ack signals a departure
      try_send(now);
    } else if (dup_acks_ == p_.dupack_threshold) {
      ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
      cwnd_ = ssthresh_ + static_cast<double>(p_.dupack_threshold);
      in_recovery_ = true;
      recover_ = next_seq_;
      ++fast_retransmits_;
      send_segment(highest_acked_, segment_len(highest_acked_), true, now);
      arm_rto(now);
    }
  }
}

void TcpSender::on_rto(SimTime now) {
  rto_timer_ = EventHandle{};
  if (finished_ || outstanding_bytes() <= 0) return;
  ++timeouts_;
  ssthresh_ = std::max(cwnd_ / 2.0, 2.0);
  cwnd_ = 1.0;
  in_recovery_ = false;
  dup_acks_ = 0;
  rto_cur_ = std::min(rto_cur_ * 2.0, p_.rto_max_s);
  send_segment(highest_acked_, segment_len(highest_acked_), true, now);
}

void TcpSender::finish(SimTime now) {
  finished_ = true;
  sim_.cancel(rto_timer_);
  rto_timer_ = EventHandle{};
  if (on_complete) on_complete(now);
}

TcpReceiver::TcpReceiver(FlowId flow, int ack_size_bytes, PacketHandler* ack_out)
    : flow_(flow), ack_size_(ack_size_bytes), ack_out_(ack_out) {}

void TcpReceiver::on_data(const Packet& pkt, SimTime now) {
  const std::int64_t begin = pkt.seq;
  const std::int64_t end = pkt.seq + pkt.payload_bytes;
  if (end > cum_) {
    // Merge [begin, end) into the out-of-order set, then advance the
    // contiguous prefix. Duplicates and overlaps collapse in the merge.
    auto [it, inserted] = out_of_order_.try_emplace(std::max(begin, cum_), end);
    if (!inserted) it->second = std::max(it->second, end);
    while (it != out_of_order_.begin()) {
      auto prev = std::prev(it);
      if (prev->second < it->first) break;
      prev->second = std::max(prev->second, it->second);
      out_of_order_.erase(it);
      it = prev;
    }
    auto next = std::next(it);
    while (next != out_of_order_.end() && next->first <= it->second) {
      it->second = std::max(it->second, next->second);
      next = out_of_order_.erase(next);
    }
    const std::int64_t before = cum_;
    while (!out_of_order_.empty() && out_of_order_.begin()->first <= cum_) {
      cum_ = std::max(cum_, out_of_order_.begin()->second);
      out_of_order_.erase(out_of_order_.begin());
    }
    if (cum_ > before && on_deliver) on_deliver(cum_ - before, now);
  }

  Packet ackp;
  ackp.flow = flow_;
  ackp.kind = PacketKind::TcpAck;
  ackp.size_bytes = ack_size_;
  ackp.ack = cum_;
  ackp.created = now;
  ack_out_->handle(ackp, now);
}

}  // namespace marksim
