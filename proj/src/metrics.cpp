#include "marksim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marksim {

void MetricsRegistry::register_flow(FlowId id, std::string kind, SimTime start) {
  FlowStats& fs = flows_[id];
  fs.flow = id;
  fs.kind = std::move(kind);
  fs.start = start;
}

FlowStats& MetricsRegistry::flow(FlowId id) {
  auto it = flows_.find(id);
  if (it == flows_.end()) throw std::invalid_argument("metrics: unknown flow " + std::to_string(id));
  return it->second;
}

void MetricsRegistry::on_marked(const Packet& pkt, Mark mark) {
  FlowStats& fs = flow(pkt.flow);
  if (mark == Mark::In) {
    ++fs.pkts_in;
    fs.bytes_marked_in += pkt.size_bytes;
  } else if (mark == Mark::Out) {
    ++fs.pkts_out;
    fs.bytes_marked_out += pkt.size_bytes;
  }
}

void MetricsRegistry::on_emitted(const Packet& pkt, SimTime now) {
  FlowStats& fs = flow(pkt.flow);
  ++fs.pkts_sent;
  fs.bytes_sent += pkt.payload_bytes;
  if (fs.first_emit < 0) fs.first_emit = now;
  fs.last_emit = now;
  if (has_stamped_rate(pkt)) {
    fs.stamped_rate_sum += pkt.stamped_rate_bps;
    ++fs.stamped_rate_samples;
  }
}

void MetricsRegistry::on_delivered(FlowId flowid, std::int64_t payload_bytes, SimTime now) {
  FlowStats& fs = flow(flowid);
  fs.bytes_delivered_total += payload_bytes;
  if (now >= window_start_) fs.bytes_delivered += payload_bytes;
}

void MetricsRegistry::on_core_drop(const Packet& pkt) { ++flow(pkt.flow).drops_core; }

void MetricsRegistry::on_completed(FlowId flowid, SimTime now) { flow(flowid).completed = now; }

std::vector<FlowStats> MetricsRegistry::rows() const {
  std::vector<FlowStats> out;
  out.reserve(flows_.size());
  for (const auto& [id, fs] : flows_) out.push_back(fs);
  return out;
}

double throughput_bps(std::int64_t bytes, double window_s) {
  if (window_s <= 0.0) throw std::invalid_argument("throughput: window must be > 0");
  return static_cast<double>(bytes) * 8.0 / window_s;
}

double fairness_index(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("fairness index: empty input");
  double sum = 0.0, sum_sq = 0.0;
  for (double x : xs) {
    if (x < 0.0) throw std::invalid_argument("fairness index: negative value");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) throw std::invalid_argument("fairness index: all-zero input");
  return sum * sum / (static_cast<double>(xs.size()) * sum_sq);
}

namespace {

GroupSummary summarize_group(const std::string& name, std::span<const FlowRecord* const> members) {
  GroupSummary g;
  g.group = name;
  g.flows = static_cast<int>(members.size());

  std::vector<double> tputs, in_tokens;
  tputs.reserve(members.size());
  in_tokens.reserve(members.size());
  double sum = 0.0;
  for (const FlowRecord* r : members) {
    tputs.push_back(r->throughput_bps);
    in_tokens.push_back(static_cast<double>(r->stats.pkts_in));
    sum += r->throughput_bps;
  }
  const double n = static_cast<double>(members.size());
  g.mean_bps = sum / n;
  double var = 0.0;
  for (double t : tputs) var += (t - g.mean_bps) * (t - g.mean_bps);
  g.stddev_bps = std::sqrt(var / n);

  auto fi_or_undefined = [](std::span<const double> xs) {
    for (double x : xs) {
      if (x > 0.0) return fairness_index(xs);
    }
    return -1.0;
  };
  g.fi_throughput = fi_or_undefined(tputs);
  g.fi_in_tokens = fi_or_undefined(in_tokens);
  return g;
}

}  // namespace

std::vector<GroupSummary> summarize(std::span<const FlowRecord> records) {
  std::map<std::string, std::vector<const FlowRecord*>> by_kind;
  std::vector<const FlowRecord*> foreground;
  for (const FlowRecord& r : records) {
    by_kind[r.stats.kind].push_back(&r);
    if (r.stats.kind != "background") foreground.push_back(&r);
  }
  std::vector<GroupSummary> out;
  for (const auto& [kind, members] : by_kind) {
    out.push_back(summarize_group(kind, members));
  }
  if (!foreground.empty()) out.push_back(summarize_group("all", foreground));
  return out;
}

}  // namespace marksim
