#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "marksim/fair_rate.hpp"
#include "marksim/packet.hpp"
#include "marksim/rng.hpp"
#include "marksim/token_bucket.hpp"

namespace marksim {

// Out-marking probability as a function of the averaged token count x:
//
//   1                                          x < min_th
//   (p_max - p_min)/(max_th - min_th) * (max_th - x)   min_th <= x < max_th
//   0                                          x >= max_th
//
// A draining bucket pulls x down and ramps the Out probability up, spreading
// downgrades across all flows in proportion to their arrival rates instead of
// downgrading whoever hits an empty bucket.
struct PamParams {
  double min_th_bytes = 0.0;
  double max_th_bytes = 0.0;
  double p_max = 1.0;
  double p_min = 0.0;
  bool use_instantaneous = false;  // drive the curve from raw tokens, not the EWMA
};

double pam_out_probability(double avg_tokens_bytes, const PamParams& params);

// Excess fraction (avg - target)/avg of a time-sliding-window rate average;
// zero at or below the target.
double tsw2cm_out_probability(double avg_rate_bps, double target_rate_bps);

// Uniform marking interface: every marker assigns In or Out to each packet
// presented at the edge.
class Marker {
 public:
  virtual ~Marker() = default;
  virtual Mark mark(Packet& pkt, SimTime now) = 0;
  virtual std::string_view name() const = 0;
};

// Plain profile marker: In while tokens last, Out once the bucket is empty.
class TokenBucketMarker final : public Marker {
 public:
  explicit TokenBucketMarker(TokenBucketConfig cfg) : bucket_(cfg) {}
  Mark mark(Packet& pkt, SimTime now) override;
  std::string_view name() const override { return "tb"; }
  const TokenBucket& bucket() const { return bucket_; }

 private:
  TokenBucket bucket_;
};

// Probabilistic marker: one uniform draw against the occupancy curve decides
// a forced Out; survivors still need a token, so In volume can never exceed
// the profile.
class PamMarker final : public Marker {
 public:
  PamMarker(TokenBucketConfig cfg, PamParams params, Rng rng)
      : bucket_(cfg), params_(params), rng_(rng) {}
  Mark mark(Packet& pkt, SimTime now) override;
  std::string_view name() const override { return "pam"; }
  const TokenBucket& bucket() const { return bucket_; }

 private:
  TokenBucket bucket_;
  PamParams params_;
  Rng rng_;
};

// Fair stateless marker: admits a packet with probability min(1, alpha/r)
// where r is the rate stamped at the flow's ingress, then draws a token.
// A flow of rate r therefore receives In bytes at rate min(r, alpha), the
// max-min fair allocation of the token rate across the aggregate.
class FsamMarker final : public Marker {
 public:
  FsamMarker(TokenBucketConfig bucket_cfg, FairRateConfig fair_cfg, Rng rng)
      : bucket_(bucket_cfg), fair_(fair_cfg), rng_(rng) {}
  Mark mark(Packet& pkt, SimTime now) override;
  std::string_view name() const override { return "fsam"; }
  const TokenBucket& bucket() const { return bucket_; }
  const FairRateState& fair_rate() const { return fair_; }

 private:
  TokenBucket bucket_;
  FairRateState fair_;
  Rng rng_;
};

// Time-sliding-window two-color baseline: rate average over a decaying
// window, Out with the excess fraction when above the target rate.
class Tsw2cmMarker final : public Marker {
 public:
  Tsw2cmMarker(double target_rate_bps, double win_length_s, Rng rng, SimTime now = 0.0);
  Mark mark(Packet& pkt, SimTime now) override;
  std::string_view name() const override { return "tsw2cm"; }
  double avg_rate_bps() const { return avg_rate_; }

 private:
  double target_;
  double win_;
  double avg_rate_;
  SimTime t_front_;
  Rng rng_;
};

}  // namespace marksim
