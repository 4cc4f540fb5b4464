#include "marksim/fair_rate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace marksim {

ExpRateEstimator::ExpRateEstimator(double k_seconds) : k_(k_seconds) {
  if (k_ <= 0.0) throw std::invalid_argument("rate estimator: K must be > 0");
}

double ExpRateEstimator::update(double bits, SimTime now) {
  if (!started_) {
    started_ = true;
    last_ = now;
    rate_ = bits / k_;
    return rate_;
  }
  const double gap = now - last_;
  if (gap <= 0.0) {
    pending_bits_ += bits;
    return rate_;
  }
  const double sample_bits = bits + pending_bits_;
  pending_bits_ = 0.0;
  const double keep = std::exp(-gap / k_);
  rate_ = (1.0 - keep) * (sample_bits / gap) + keep * rate_;
  last_ = now;
  return rate_;
}

FairRateState::FairRateState(FairRateConfig cfg, SimTime now)
    : cfg_(cfg), alpha_(cfg.cir_bps), arrivals_(cfg.k_est_s), accepted_(cfg.k_est_s),
      window_start_(now) {
  if (cfg_.cir_bps <= 0.0) throw std::invalid_argument("fair rate: cir_bps must be > 0");
  if (cfg_.k_c_s <= 0.0) throw std::invalid_argument("fair rate: k_c_s must be > 0");
  if (cfg_.alpha_clamp <= 1.0) throw std::invalid_argument("fair rate: alpha_clamp must be > 1");
}

void FairRateState::on_arrival(const Packet& pkt, bool allocated, SimTime now) {
  const double bits = pkt.size_bytes * 8.0;
  arrivals_.update(bits, now);
  window_bits_ += bits;
  if (allocated) {
    accepted_.update(bits, now);
    window_granted_bits_ += bits;
  }
  if (has_stamped_rate(pkt)) max_rate_seen_ = std::max(max_rate_seen_, pkt.stamped_rate_bps);
}

double FairRateState::update_alpha(SimTime now) {
  const double window = now - window_start_;
  const double arrived = window > 0.0 ? window_bits_ / window : arrivals_.rate_bps();
  const double granted = window > 0.0 ? window_granted_bits_ / window : accept_rate_bps();

  congested_ = arrived >= cfg_.cir_bps;
  if (congested_) {
    if (granted > 0.0) {
      const double raw = alpha_ * cfg_.cir_bps / granted;
      alpha_ = std::clamp(raw, alpha_ / cfg_.alpha_clamp, alpha_ * cfg_.alpha_clamp);
    }
    // granted == 0: no information, hold the share
  } else if (max_rate_seen_ > 0.0) {
    alpha_ = max_rate_seen_;
  }
  max_rate_seen_ = 0.0;
  window_bits_ = 0.0;
  window_granted_bits_ = 0.0;
  window_start_ = now;
  return alpha_;
}

double fsam_allocation_probability(double alpha_bps, double stamped_rate_bps) {
  if (stamped_rate_bps <= 0.0) {
    throw std::invalid_argument("allocation probability: stamped rate must be > 0");
  }
  return std::min(1.0, alpha_bps / stamped_rate_bps);
}

double waterfill_fair_share(std::span<const double> rates_bps, double capacity_bps) {
  if (rates_bps.empty()) throw std::invalid_argument("waterfill: rates must be non-empty");
  if (capacity_bps <= 0.0) throw std::invalid_argument("waterfill: capacity must be > 0");

  std::vector<double> rates(rates_bps.begin(), rates_bps.end());
  std::sort(rates.begin(), rates.end());

  double total = 0.0;
  for (double r : rates) total += r;
  if (total <= capacity_bps) return rates.back();

  // Fill the smallest demands first; the first level at which the remaining
  // capacity split evenly no longer covers a demand is the fair share.
  double remaining = capacity_bps;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double level = remaining / static_cast<double>(rates.size() - i);
    if (rates[i] >= level) return level;
    remaining -= rates[i];
  }
  return rates.back();  // unreachable when total > capacity
}

}  // namespace marksim
