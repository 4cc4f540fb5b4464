#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "marksim/packet.hpp"

namespace marksim {

// Per-flow accounting gathered at the marker (In/Out split), the sinks
// (delivered bytes) and the core queue (drops).
struct FlowStats {
  FlowId flow = -1;
  std::string kind;  // tcp_bulk | tcp_short | udp | background
  std::int64_t pkts_in = 0;
  std::int64_t pkts_out = 0;
  std::int64_t bytes_marked_in = 0;
  std::int64_t bytes_marked_out = 0;
  std::int64_t bytes_delivered = 0;        // inside the measurement window
  std::int64_t bytes_delivered_total = 0;  // whole run
  std::int64_t drops_core = 0;
  std::int64_t pkts_sent = 0;
  std::int64_t bytes_sent = 0;
  SimTime start = 0.0;
  SimTime first_emit = -1.0;
  SimTime last_emit = -1.0;
  SimTime completed = -1.0;  // short flows: when the full payload was acked
  double stamped_rate_sum = 0.0;  // ingress stamps, for estimator diagnostics
  std::int64_t stamped_rate_samples = 0;
  int tcp_timeouts = 0;  // transport diagnostics, filled after the run
  int tcp_fast_retransmits = 0;
};

// Collects FlowStats for one run. Delivered bytes count toward the
// measurement window only from `window_start` on.
class MetricsRegistry {
 public:
  MetricsRegistry(SimTime window_start, SimTime run_end)
      : window_start_(window_start), run_end_(run_end) {}

  void register_flow(FlowId id, std::string kind, SimTime start);
  FlowStats& flow(FlowId id);

  void on_marked(const Packet& pkt, Mark mark);
  void on_emitted(const Packet& pkt, SimTime now);
  void on_delivered(FlowId flowid, std::int64_t payload_bytes, SimTime now);
  void on_core_drop(const Packet& pkt);
  void on_completed(FlowId flowid, SimTime now);

  SimTime window_start() const { return window_start_; }
  SimTime run_end() const { return run_end_; }
  double window_seconds() const { return run_end_ - window_start_; }

  std::vector<FlowStats> rows() const;  // ordered by flow id

 private:
  SimTime window_start_;
  SimTime run_end_;
  std::map<FlowId, FlowStats> flows_;
};

// bytes * 8 / window; window must be positive.
double throughput_bps(std::int64_t bytes, double window_s);

// Jain index (sum x)^2 / (N * sum x^2); 1 for equal shares, 1/N when a single
// entry holds everything. Undefined (throws) for empty or all-zero input.
double fairness_index(std::span<const double> xs);

struct FlowRecord {
  FlowStats stats;
  double throughput_bps = 0.0;
};

struct GroupSummary {
  std::string group;
  int flows = 0;
  double mean_bps = 0.0;
  double stddev_bps = 0.0;      // population std-dev across the group's flows
  double fi_throughput = -1.0;  // -1 when undefined (all-zero)
  double fi_in_tokens = -1.0;
};

// One row per flow kind present plus an "all" row over the foreground kinds
// (tcp_bulk, tcp_short, udp); background is reported but not folded into "all".
std::vector<GroupSummary> summarize(std::span<const FlowRecord> records);

}  // namespace marksim
