#pragma once

#include "marksim/packet.hpp"

namespace marksim {

struct TokenBucketConfig {
  double cir_bps = 0.0;      // committed information rate
  double burst_bytes = 0.0;  // bucket capacity
  double ewma_weight = 0.002;
};

// Token bucket profile state. Tokens are tracked in bytes; the bucket fills
// lazily on access at cir/8 bytes per second up to the burst capacity. The
// per-arrival EWMA of the token count is what probabilistic marking reads.
class TokenBucket {
 public:
  explicit TokenBucket(TokenBucketConfig cfg, SimTime now = 0.0);

  // Brings the token count up to date. `now` must not regress.
  void refill(SimTime now);

  // All-or-nothing withdrawal; no partial consumption, no token debt.
  bool try_consume(double size_bytes);

  // avg' = (1 - w) * avg + w * tokens; call once per packet arrival.
  double update_avg();

  double tokens() const { return tokens_; }
  double avg_tokens() const { return avg_tokens_; }
  double cir_bps() const { return cfg_.cir_bps; }
  double burst_bytes() const { return cfg_.burst_bytes; }
  double ewma_weight() const { return cfg_.ewma_weight; }
  SimTime last_refill() const { return last_refill_; }

 private:
  TokenBucketConfig cfg_;
  double tokens_;
  double avg_tokens_;
  SimTime last_refill_;
};

}  // namespace marksim
