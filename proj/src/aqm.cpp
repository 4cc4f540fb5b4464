#include "marksim/aqm.hpp"

#include <cmath>

namespace marksim {

double red_drop_probability(double avg_pkts, const RedParams& p) {
  if (avg_pkts < p.min_th_pkts) return 0.0;
  if (avg_pkts >= p.max_th_pkts) return 1.0;
  return p.max_p * (avg_pkts - p.min_th_pkts) / (p.max_th_pkts - p.min_th_pkts);
}

namespace {

// One coin per probabilistic decision; deterministic branches draw nothing.
bool drop_coin(double p, Rng& rng) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return rng.uniform01() < p;
}

// Ages an average across an idle gap as if `rate * gap` zero-occupancy
// samples had arrived.
double aged(double avg, double w, double rate, double gap_s) {
  if (rate <= 0.0 || gap_s <= 0.0 || avg <= 0.0) return avg;
  return avg * std::pow(1.0 - w, rate * gap_s);
}

}  // namespace

bool DropTailQueue::enqueue(const Packet& pkt, SimTime) {
  if (buf_.size() >= capacity_) return false;
  buf_.push_back(pkt);
  return true;
}

std::optional<Packet> DropTailQueue::dequeue(SimTime) {
  if (buf_.empty()) return std::nullopt;
  Packet p = buf_.front();
  buf_.pop_front();
  return p;
}

bool RedQueue::enqueue(const Packet& pkt, SimTime now) {
  if (idle_since_ >= 0.0) {
    avg_ = aged(avg_, params_.ewma_weight, idle_rate_, now - idle_since_);
    idle_since_ = -1.0;
  }
  avg_ = (1.0 - params_.ewma_weight) * avg_ + params_.ewma_weight * static_cast<double>(buf_.size());
  if (drop_coin(red_drop_probability(avg_, params_), rng_)) return false;
  if (buf_.size() >= capacity_) return false;
  buf_.push_back(pkt);
  return true;
}

std::optional<Packet> RedQueue::dequeue(SimTime now) {
  if (buf_.empty()) return std::nullopt;
  Packet p = buf_.front();
  buf_.pop_front();
  if (buf_.empty()) idle_since_ = now;
  return p;
}

bool RioQueue::enqueue(const Packet& pkt, SimTime now) {
  if (idle_since_ >= 0.0) {
    const double gap = now - idle_since_;
    avg_in_ = aged(avg_in_, in_params_.ewma_weight, idle_rate_, gap);
    avg_total_ = aged(avg_total_, out_params_.ewma_weight, idle_rate_, gap);
    idle_since_ = -1.0;
  }
  const bool is_in = pkt.mark == Mark::In;
  // Both averages advance on every arrival, from the occupancy before it.
  const double w_in = in_params_.ewma_weight;
  const double w_out = out_params_.ewma_weight;
  avg_in_ = (1.0 - w_in) * avg_in_ + w_in * static_cast<double>(in_count_);
  avg_total_ = (1.0 - w_out) * avg_total_ + w_out * static_cast<double>(buf_.size());

  const double p = is_in ? red_drop_probability(avg_in_, in_params_)
                         : red_drop_probability(avg_total_, out_params_);
  if (drop_coin(p, rng_)) return false;
  if (buf_.size() >= capacity_) return false;
  buf_.push_back(pkt);
  if (is_in) ++in_count_;
  return true;
}

std::optional<Packet> RioQueue::dequeue(SimTime now) {
  if (buf_.empty()) return std::nullopt;
  Packet p = buf_.front();
  buf_.pop_front();
  if (p.mark == Mark::In) --in_count_;
  if (buf_.empty()) idle_since_ = now;
  return p;
}

}  // namespace marksim
