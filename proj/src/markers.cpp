#include "marksim/markers.hpp"

#include <stdexcept>
#include <string>

namespace marksim {

double pam_out_probability(double x, const PamParams& p) {
  if (x < p.min_th_bytes) return 1.0;
  if (x >= p.max_th_bytes) return 0.0;
  return (p.p_max - p.p_min) / (p.max_th_bytes - p.min_th_bytes) * (p.max_th_bytes - x);
}

double tsw2cm_out_probability(double avg_rate_bps, double target_rate_bps) {
  if (avg_rate_bps <= target_rate_bps) return 0.0;
  return (avg_rate_bps - target_rate_bps) / avg_rate_bps;
}

Mark TokenBucketMarker::mark(Packet& pkt, SimTime now) {
  bucket_.refill(now);
  return bucket_.try_consume(pkt.size_bytes) ? Mark::In : Mark::Out;
}

Mark PamMarker::mark(Packet& pkt, SimTime now) {
  bucket_.refill(now);
  bucket_.update_avg();
  const double x = params_.use_instantaneous ? bucket_.tokens() : bucket_.avg_tokens();
  const double u = rng_.uniform01();
  if (u < pam_out_probability(x, params_)) return Mark::Out;
  return bucket_.try_consume(pkt.size_bytes) ? Mark::In : Mark::Out;
}

Mark FsamMarker::mark(Packet& pkt, SimTime now) {
  if (!has_stamped_rate(pkt) || pkt.stamped_rate_bps <= 0.0) {
    throw std::runtime_error("fsam: packet of flow " + std::to_string(pkt.flow) +
                             " reached the marker without an ingress rate stamp");
  }
  bucket_.refill(now);
  if (fair_.window_elapsed(now)) fair_.update_alpha(now);

  const double p = fsam_allocation_probability(fair_.alpha_bps(), pkt.stamped_rate_bps);
  const double u = rng_.uniform01();
  const bool allocated = u < p;
  const bool in = allocated && bucket_.try_consume(pkt.size_bytes);
  fair_.on_arrival(pkt, allocated, now);
  return in ? Mark::In : Mark::Out;
}

Tsw2cmMarker::Tsw2cmMarker(double target_rate_bps, double win_length_s, Rng rng, SimTime now)
    : target_(target_rate_bps), win_(win_length_s), avg_rate_(target_rate_bps), t_front_(now),
      rng_(rng) {
  if (target_ <= 0.0) throw std::invalid_argument("tsw2cm: target rate must be > 0");
  if (win_ <= 0.0) throw std::invalid_argument("tsw2cm: window length must be > 0");
}

Mark Tsw2cmMarker::mark(Packet& pkt, SimTime now) {
  avg_rate_ = (avg_rate_ * win_ + pkt.size_bytes * 8.0) / (now - t_front_ + win_);
  t_front_ = now;
  const double p_out = tsw2cm_out_probability(avg_rate_, target_);
  if (p_out <= 0.0) return Mark::In;
  return rng_.uniform01() < p_out ? Mark::Out : Mark::In;
}

}  // namespace marksim
