#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "marksim/rng.hpp"
#include "marksim/token_bucket.hpp"

using namespace marksim;

namespace {
TokenBucket drained(TokenBucketConfig cfg) {
  TokenBucket tb(cfg);
  while (tb.try_consume(1.0)) {
  }
  // leftover fraction below 1 byte
  return tb;
}
}  // namespace

TEST_CASE("refill adds cir*dt/8 bytes") {
  // 1 Mb/s for 0.1 s = 10^6 * 0.1 / 8 = 12500 bytes
  TokenBucket tb = drained({1e6, 62500.0, 0.002});
  const double leftover = tb.tokens();
  tb.refill(0.1);
  CHECK(tb.tokens() == doctest::Approx(leftover + 12500.0));
}

TEST_CASE("zero elapsed time leaves the bucket unchanged") {
  TokenBucket tb({1e6, 62500.0, 0.002});
  tb.refill(0.5);
  const double before = tb.tokens();
  tb.refill(0.5);
  CHECK(tb.tokens() == before);
}

TEST_CASE("tokens cap at the burst size") {
  TokenBucket tb({1e6, 62500.0, 0.002});
  tb.refill(1000.0);
  CHECK(tb.tokens() == 62500.0);
}

TEST_CASE("refill rejects time regression") {
  TokenBucket tb({1e6, 62500.0, 0.002});
  tb.refill(1.0);
  CHECK_THROWS_AS(tb.refill(0.5), std::invalid_argument);
}

TEST_CASE("try_consume is all or nothing") {
  TokenBucket tb({1e6, 5000.0, 0.002});
  CHECK(tb.try_consume(1000.0));
  CHECK(tb.tokens() == doctest::Approx(4000.0));

  TokenBucket small({1e6, 5000.0, 0.002});
  while (small.tokens() > 500.0) small.try_consume(small.tokens() - 500.0);
  CHECK_FALSE(small.try_consume(1000.0));
  CHECK(small.tokens() == doctest::Approx(500.0));
}

TEST_CASE("exact-boundary consume empties the bucket") {
  TokenBucket tb({1e6, 1000.0, 0.002});
  CHECK(tb.try_consume(1000.0));
  CHECK(tb.tokens() == 0.0);
}

TEST_CASE("consume rejects non-positive sizes") {
  TokenBucket tb({1e6, 1000.0, 0.002});
  CHECK_THROWS_AS(tb.try_consume(0.0), std::invalid_argument);
  CHECK_THROWS_AS(tb.try_consume(-5.0), std::invalid_argument);
}

TEST_CASE("update_avg blends toward the current token count") {
  SUBCASE("w=1 snaps to tokens") {
    TokenBucket tb({1e6, 5000.0, 1.0});
    tb.try_consume(3000.0);
    CHECK(tb.update_avg() == doctest::Approx(2000.0));
  }
  SUBCASE("fixed point stays put") {
    TokenBucket tb({1e6, 5000.0, 0.3});
    // tokens == avg == burst at construction
    CHECK(tb.update_avg() == doctest::Approx(5000.0));
  }
  SUBCASE("avg=0, tokens=1000, w=0.002 gives 2.0") {
    // direct evaluation: (1 - w)*0 + w*1000 = 2
    TokenBucket tb({8e6, 1000.0, 0.002});
    while (tb.try_consume(1.0)) {
    }
    for (int i = 0; i < 20000; ++i) tb.update_avg();  // walk the average to ~0
    CHECK(tb.avg_tokens() < 1e-9);
    tb.refill(1.0);  // 8e6 * 1 / 8 = 1e6 bytes, capped at 1000
    REQUIRE(tb.tokens() == 1000.0);
    const double avg_before = tb.avg_tokens();
    const double expected = (1.0 - 0.002) * avg_before + 0.002 * 1000.0;
    CHECK(tb.update_avg() == doctest::Approx(expected));
    CHECK(tb.update_avg() == doctest::Approx((1.0 - 0.002) * expected + 2.0).epsilon(1e-9));
    CHECK(expected == doctest::Approx(2.0).epsilon(1e-4));
  }
}

TEST_CASE("update_avg converges geometrically to a constant input") {
  TokenBucket tb({1e6, 10000.0, 0.01});
  tb.try_consume(6000.0);  // tokens fixed at 4000 from here on
  double prev_err = std::abs(tb.avg_tokens() - 4000.0);
  for (int i = 0; i < 50; ++i) {
    tb.update_avg();
    const double err = std::abs(tb.avg_tokens() - 4000.0);
    CHECK(err == doctest::Approx(prev_err * 0.99).epsilon(1e-9));
    prev_err = err;
  }
}

TEST_CASE("tokens and avg stay inside [0, burst] over random traces") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const double burst = rng.uniform(1000.0, 100000.0);
    TokenBucket tb({rng.uniform(1e5, 1e7), burst, rng.uniform(0.001, 1.0)});
    double now = 0.0;
    for (int i = 0; i < 2000; ++i) {
      now += rng.exponential(0.01);
      tb.refill(now);
      tb.update_avg();
      tb.try_consume(rng.uniform(1.0, 2000.0));
      CHECK(tb.tokens() >= 0.0);
      CHECK(tb.tokens() <= burst);
      CHECK(tb.avg_tokens() >= 0.0);
      CHECK(tb.avg_tokens() <= burst);
    }
  }
}

TEST_CASE("consumption never exceeds cir*t/8 + burst") {
  // Conservation over any prefix of a random arrival trace.
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const double cir = rng.uniform(1e5, 5e6);
    const double burst = rng.uniform(2000.0, 50000.0);
    TokenBucket tb({cir, burst, 0.002});
    double now = 0.0;
    double consumed = 0.0;
    for (int i = 0; i < 3000; ++i) {
      now += rng.exponential(0.002);
      tb.refill(now);
      const double size = rng.uniform(40.0, 1500.0);
      if (tb.try_consume(size)) consumed += size;
      CHECK(consumed <= cir * now / 8.0 + burst + 1e-6);
    }
  }
}
