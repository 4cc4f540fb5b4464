#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "marksim/fair_rate.hpp"
#include "marksim/rng.hpp"

using namespace marksim;

namespace {
Packet data_packet(int size_bytes, FlowId flow = 0) {
  Packet p;
  p.flow = flow;
  p.size_bytes = size_bytes;
  p.payload_bytes = size_bytes;
  return p;
}
}  // namespace

TEST_CASE("constant spacing converges to l/T") {
  // 1250 B every 10 ms = 1 Mb/s; the recurrence's fixed point is exactly l/T.
  FlowRateStamper stamper(0.1);
  Packet p = data_packet(1250);
  double t = 0.0;
  for (int i = 0; i < 300; ++i) {
    stamper.stamp(p, t);
    t += 0.01;
  }
  CHECK(p.stamped_rate_bps == doctest::Approx(1e6).epsilon(1e-6));
}

TEST_CASE("first packet bootstraps to l/K") {
  FlowRateStamper stamper(0.1);
  Packet p = data_packet(1250);
  stamper.stamp(p, 5.0);
  CHECK(p.stamped_rate_bps == doctest::Approx(1250.0 * 8.0 / 0.1));
}

TEST_CASE("a long idle gap collapses the estimate") {
  FlowRateStamper stamper(0.1);
  Packet p = data_packet(1250);
  double t = 0.0;
  for (int i = 0; i < 100; ++i) {
    stamper.stamp(p, t);
    t += 0.01;
  }
  REQUIRE(p.stamped_rate_bps > 9e5);
  stamper.stamp(p, t + 1000.0);  // next packet after ~10^4 K of silence
  CHECK(p.stamped_rate_bps < 100.0);  // ~ l/T -> 0
}

TEST_CASE("estimate lags a ramping flow") {
  // Sending rate doubles every 50 ms; the averaged estimate must sit below
  // the instantaneous rate throughout the first K seconds.
  FlowRateStamper stamper(0.1);
  double t = 0.0;
  double gap = 0.02;
  Packet p = data_packet(1000);
  stamper.stamp(p, t);
  for (int step = 0; step < 10; ++step) {
    for (int i = 0; i < 4; ++i) {
      t += gap;
      stamper.stamp(p, t);
      const double instantaneous = 1000.0 * 8.0 / gap;
      CHECK(p.stamped_rate_bps < instantaneous);
    }
    gap *= 0.7;
  }
}

TEST_CASE("same-instant arrivals fold into the next sample") {
  ExpRateEstimator est(0.1);
  est.update(8000.0, 0.0);
  const double before = est.update(8000.0, 0.01);
  CHECK(est.update(8000.0, 0.01) == before);  // no time elapsed, rate unchanged
  const double after = est.update(8000.0, 0.02);
  // the folded bits make the next sample see 16000 bits over 10 ms
  const double keep = std::exp(-0.01 / 0.1);
  CHECK(after == doctest::Approx((1 - keep) * (16000.0 / 0.01) + keep * before));
}

TEST_CASE("aggregate arrival estimate tracks a Poisson stream") {
  // ~2 Mb/s of 1000-byte packets: mean gap 4 ms.
  Rng rng(42);
  FairRateState fr({.cir_bps = 1e6, .k_est_s = 0.1, .k_c_s = 0.2});
  double t = 0.0;
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 2e6;
  while (t < 1.0) {
    t += rng.exponential(0.004);
    fr.on_arrival(p, false, t);
  }
  CHECK(fr.arrival_rate_bps() == doctest::Approx(2e6).epsilon(0.10));
}

TEST_CASE("acceptance estimate tracks arrivals when everything is admitted") {
  FairRateState fr({.cir_bps = 1e6, .k_est_s = 0.1, .k_c_s = 0.2});
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 1e6;
  for (double t = 0.0; t < 2.0; t += 0.008) fr.on_arrival(p, true, t);
  CHECK(fr.accept_rate_bps() == doctest::Approx(fr.arrival_rate_bps()).epsilon(1e-9));
}

TEST_CASE("update_alpha: congested multiplicative step alpha*C/R") {
  // Arrivals 2 Mb/s with every other packet admitted: R_hat ~ 1 Mb/s against
  // C = 0.5 Mb/s, so each window update halves alpha (the 0.3 -> 0.15 rule,
  // the step factor C/R = 0.5 is independent of alpha).
  FairRateState fr({.cir_bps = 0.5e6, .k_est_s = 0.05, .k_c_s = 0.2});
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 2e6;
  bool admit = true;
  for (double t = 0.0; t < 2.0; t += 0.004) {
    fr.on_arrival(p, admit, t);
    admit = !admit;
  }
  CHECK(fr.arrival_rate_bps() == doctest::Approx(2e6).epsilon(0.02));
  CHECK(fr.accept_rate_bps() == doctest::Approx(1e6).epsilon(0.02));
  CHECK(fr.alpha_bps() == 0.5e6);  // bootstrap = C

  const double a1 = fr.update_alpha(2.0);
  CHECK(fr.congested());
  CHECK(a1 == doctest::Approx(0.25e6).epsilon(0.03));

  // keep the estimators where they are and take a second window step
  admit = true;
  for (double t = 2.0; t < 2.2; t += 0.004) {
    fr.on_arrival(p, admit, t);
    admit = !admit;
  }
  const double a2 = fr.update_alpha(2.2);
  CHECK(a2 == doctest::Approx(a1 * 0.5).epsilon(0.05));
}

TEST_CASE("update_alpha: uncongested tracks the largest stamped rate") {
  FairRateState fr({.cir_bps = 10e6, .k_est_s = 0.1, .k_c_s = 0.2});
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 0.8e6;
  for (double t = 0.0; t < 1.0; t += 0.01) {
    Packet q = p;
    q.stamped_rate_bps = (t > 0.5) ? 1.3e6 : 0.8e6;
    fr.on_arrival(q, true, t);
  }
  const double a = fr.update_alpha(1.0);
  CHECK_FALSE(fr.congested());
  CHECK(a == 1.3e6);
}

TEST_CASE("update_alpha: holds when congested with zero acceptance") {
  FairRateState fr({.cir_bps = 0.5e6, .k_est_s = 0.05, .k_c_s = 0.2});
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 2e6;
  for (double t = 0.0; t < 1.0; t += 0.004) fr.on_arrival(p, false, t);
  const double before = fr.alpha_bps();
  CHECK(fr.update_alpha(1.0) == before);
}

TEST_CASE("update_alpha: step is clamped to the configured factor") {
  FairRateState fr({.cir_bps = 1e6, .k_est_s = 0.05, .k_c_s = 0.2, .alpha_clamp = 2.0});
  Packet p = data_packet(1000);
  p.stamped_rate_bps = 50e6;
  // Arrivals 20 Mb/s, tiny acceptance -> raw update would multiply alpha by ~50.
  int n = 0;
  for (double t = 0.0; t < 1.0; t += 0.0004) {
    fr.on_arrival(p, (n++ % 50) == 0, t);
  }
  const double before = fr.alpha_bps();
  const double after = fr.update_alpha(1.0);
  CHECK(after <= before * 2.0 + 1e-9);
}

// --- water-filling oracle ---------------------------------------------------

TEST_CASE("waterfill: all flows above the share") {
  const double rates[] = {1e6, 4e6, 2e6};
  CHECK(waterfill_fair_share(rates, 0.5e6) == doctest::Approx(0.5e6 / 3.0));
}

TEST_CASE("waterfill: capacity exceeds demand") {
  const double rates[] = {1e6, 4e6, 2e6};
  CHECK(waterfill_fair_share(rates, 10e6) == doctest::Approx(4e6));
}

TEST_CASE("waterfill: small flow fully served") {
  const double rates[] = {0.1e6, 4e6};
  CHECK(waterfill_fair_share(rates, 1.0e6) == doctest::Approx(0.9e6));
}

TEST_CASE("waterfill: allocations sum to capacity under overload") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 9);
    std::vector<double> rates;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      rates.push_back(rng.uniform(0.05e6, 8e6));
      total += rates.back();
    }
    const double cap = rng.uniform(0.2, 0.95) * total;
    const double alpha = waterfill_fair_share(rates, cap);
    double allocated = 0.0;
    for (double r : rates) allocated += std::min(r, alpha);
    CHECK(allocated == doctest::Approx(cap).epsilon(1e-9));
  }
}

TEST_CASE("waterfill is scale covariant") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> rates;
    for (int i = 0; i < 5; ++i) rates.push_back(rng.uniform(0.1e6, 5e6));
    const double cap = rng.uniform(0.5e6, 8e6);
    const double k = rng.uniform(0.1, 10.0);
    std::vector<double> scaled = rates;
    for (double& r : scaled) r *= k;
    CHECK(waterfill_fair_share(scaled, cap * k) ==
          doctest::Approx(k * waterfill_fair_share(rates, cap)).epsilon(1e-9));
  }
}

TEST_CASE("waterfill rejects empty input and non-positive capacity") {
  CHECK_THROWS_AS(waterfill_fair_share({}, 1.0), std::invalid_argument);
  const double rates[] = {1.0};
  CHECK_THROWS_AS(waterfill_fair_share(rates, 0.0), std::invalid_argument);
}
