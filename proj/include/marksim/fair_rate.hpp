#pragma once

#include <span>

#include "marksim/packet.hpp"

namespace marksim {

// Exponentially windowed rate estimator. A sample of `bits` arriving after a
// gap T blends in with weight 1 - exp(-T/K), so recent traffic dominates and
// the estimate of a constant-spaced stream converges to its exact rate. The
// first sample bootstraps to bits/K.
class ExpRateEstimator {
 public:
  explicit ExpRateEstimator(double k_seconds);

  double update(double bits, SimTime now);
  double rate_bps() const { return rate_; }
  bool started() const { return started_; }

 private:
  double k_;
  double rate_ = 0.0;
  double pending_bits_ = 0.0;  // same-instant arrivals fold into the next sample
  SimTime last_ = 0.0;
  bool started_ = false;
};

// Writes the flow's current rate estimate into every packet it emits. Lives
// at the flow's ingress, one instance per flow, so no shared state is needed
// anywhere downstream.
class FlowRateStamper {
 public:
  explicit FlowRateStamper(double k_seconds) : est_(k_seconds) {}

  void stamp(Packet& pkt, SimTime now) {
    pkt.stamped_rate_bps = est_.update(pkt.size_bytes * 8.0, now);
  }

  double rate_bps() const { return est_.rate_bps(); }

 private:
  ExpRateEstimator est_;
};

struct FairRateConfig {
  double cir_bps = 0.0;       // token rate C the controller tries to fill
  double k_est_s = 0.1;       // averaging window for arrival/acceptance rates
  double k_c_s = 0.2;         // fair-share decision window
  double alpha_clamp = 2.0;   // max multiplicative step per window
};

// Fair-share controller at the egress marker. Tracks the aggregate arrival
// rate and the rate granted by the allocation-probability test, and once per
// decision window moves the share alpha so that the granted rate matches the
// token rate:
//
//   congested (arrivals >= C):  alpha' = alpha * C / R_hat   (step-clamped)
//   uncongested:                alpha' = largest stamped rate seen
//
// R_hat must measure the traffic passing the probability test, not the bytes
// that also won a token: the bucket caps the latter at C, which would pin the
// step factor C/R_hat at 1 and freeze alpha wherever it started. With the
// granted rate, the stationary point is sum_i min(r_i, alpha*) = C, the
// max-min fair share. Until the first window completes alpha = C, which
// grants everything and lets the estimators warm up.
class FairRateState {
 public:
  explicit FairRateState(FairRateConfig cfg, SimTime now = 0.0);

  // Feed one packet arrival; `allocated` means it passed the allocation
  // probability test (whether or not a token was left for it).
  void on_arrival(const Packet& pkt, bool allocated, SimTime now);

  bool window_elapsed(SimTime now) const { return now - window_start_ >= cfg_.k_c_s; }

  // Applies the window update above and opens a new window. The congestion
  // test and the step factor read the byte counts of the window just closed
  // (exact rates over at least k_c seconds); the running EWMAs remain the
  // smoothed views of the same quantities.
  double update_alpha(SimTime now);

  double alpha_bps() const { return alpha_; }
  double arrival_rate_bps() const { return arrivals_.rate_bps(); }
  double accept_rate_bps() const { return accepted_.rate_bps(); }
  double max_rate_seen_bps() const { return max_rate_seen_; }
  bool congested() const { return congested_; }

 private:
  FairRateConfig cfg_;
  double alpha_;
  ExpRateEstimator arrivals_;
  ExpRateEstimator accepted_;
  double max_rate_seen_ = 0.0;
  double window_bits_ = 0.0;
  double window_granted_bits_ = 0.0;
  bool congested_ = false;
  SimTime window_start_;
};

// Token allocation probability for a flow stamped with `rate`: min(1, alpha/rate).
double fsam_allocation_probability(double alpha_bps, double stamped_rate_bps);

// Exact max-min fair share: the alpha* with sum_i min(r_i, alpha*) == capacity
// when demand exceeds capacity, else max(r_i). Sort-and-fill; used as the
// independent reference the closed-loop controller is checked against.
double waterfill_fair_share(std::span<const double> rates_bps, double capacity_bps);

}  // namespace marksim
