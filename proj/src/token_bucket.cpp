#include "marksim/token_bucket.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace marksim {

TokenBucket::TokenBucket(TokenBucketConfig cfg, SimTime now)
    : cfg_(cfg), tokens_(cfg.burst_bytes), avg_tokens_(cfg.burst_bytes), last_refill_(now) {
  if (cfg_.cir_bps <= 0.0) throw std::invalid_argument("token bucket: cir_bps must be > 0");
  if (cfg_.burst_bytes <= 0.0) throw std::invalid_argument("token bucket: burst_bytes must be > 0");
  if (cfg_.ewma_weight <= 0.0 || cfg_.ewma_weight > 1.0) {
    throw std::invalid_argument("token bucket: ewma_weight must be in (0, 1]");
  }
}

void TokenBucket::refill(SimTime now) {
  if (now < last_refill_) {
    throw std::invalid_argument("token bucket: refill time regression (" + std::to_string(now) +
                                " < " + std::to_string(last_refill_) + ")");
  }
  tokens_ = std::min(cfg_.burst_bytes, tokens_ + cfg_.cir_bps * (now - last_refill_) / 8.0);
  last_refill_ = now;
}

bool TokenBucket::try_consume(double size_bytes) {
  if (size_bytes <= 0.0) throw std::invalid_argument("token bucket: consume size must be > 0");
  if (tokens_ >= size_bytes) {
    tokens_ -= size_bytes;
    return true;
  }
  return false;
}

double TokenBucket::update_avg() {
  avg_tokens_ = (1.0 - cfg_.ewma_weight) * avg_tokens_ + cfg_.ewma_weight * tokens_;
  return avg_tokens_;
}

}  // namespace marksim
