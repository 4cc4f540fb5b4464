#include "marksim/runner.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "marksim/engine.hpp"
#include "marksim/fair_rate.hpp"
#include "marksim/link.hpp"
#include "marksim/markers.hpp"
#include "marksim/rng.hpp"
#include "marksim/tcp.hpp"
#include "marksim/trace.hpp"
#include "marksim/traffic.hpp"

namespace marksim {

namespace {

std::unique_ptr<QueueDisc> make_queue(const QueueConfig& q, Rng rng, double link_bandwidth_bps) {
  const auto cap = static_cast<std::size_t>(q.capacity_pkts);
  // averaging decays across idle gaps at the service rate of a nominal packet
  const double idle_rate = link_bandwidth_bps / (8.0 * 1000.0);
  if (q.discipline == "droptail") return std::make_unique<DropTailQueue>(cap);
  if (q.discipline == "red") return std::make_unique<RedQueue>(cap, q.red, rng, idle_rate);
  if (q.discipline == "rio") {
    return std::make_unique<RioQueue>(cap, q.rio_in, q.rio_out, rng, idle_rate);
  }
  throw std::runtime_error("unknown queue discipline: " + q.discipline);
}

std::unique_ptr<Marker> make_marker(const MarkerConfig& m, const std::string& type, Rng rng) {
  TokenBucketConfig bucket{m.cir_bps, m.burst_bytes, m.ewma_weight};
  if (type == "tb") return std::make_unique<TokenBucketMarker>(bucket);
  if (type == "pam") {
    PamParams p;
    p.min_th_bytes = m.pam.min_th_bytes;
    p.max_th_bytes = m.pam.max_th_bytes;
    p.p_max = m.pam.p_max;
    p.p_min = m.pam.p_min;
    p.use_instantaneous = m.pam.use_instantaneous;
    return std::make_unique<PamMarker>(bucket, p, rng);
  }
  if (type == "fsam") {
    FairRateConfig f;
    f.cir_bps = m.cir_bps;
    f.k_est_s = m.fsam.k_est_seconds;
    f.k_c_s = m.fsam.k_c_seconds;
    f.alpha_clamp = m.fsam.alpha_clamp_factor;
    return std::make_unique<FsamMarker>(bucket, f, rng);
  }
  if (type == "tsw2cm") {
    return std::make_unique<Tsw2cmMarker>(m.cir_bps, m.tsw2cm.win_length_s, rng);
  }
  throw std::runtime_error("unknown marker type: " + type);
}

// Forwarding node with a per-packet routing decision.
class RouteNode final : public PacketHandler {
 public:
  explicit RouteNode(std::function<PacketHandler*(const Packet&)> route)
      : route_(std::move(route)) {}
  void handle(Packet pkt, SimTime now) override { route_(pkt)->handle(pkt, now); }

 private:
  std::function<PacketHandler*(const Packet&)> route_;
};

// Per-flow dispatch (receivers at the sinks, senders on the ack path).
class FlowDemux final : public PacketHandler {
 public:
  void add(FlowId flow, PacketHandler* target) { targets_[flow] = target; }
  void handle(Packet pkt, SimTime now) override {
    auto it = targets_.find(pkt.flow);
    if (it == targets_.end()) {
      throw std::runtime_error("demux: no handler for flow " + std::to_string(pkt.flow));
    }
    it->second->handle(pkt, now);
  }

 private:
  std::unordered_map<FlowId, PacketHandler*> targets_;
};

// Terminal sink for UDP flows.
class UdpSink final : public PacketHandler {
 public:
  UdpSink(MetricsRegistry* metrics, TraceLog* trace) : metrics_(metrics), trace_(trace) {}
  void handle(Packet pkt, SimTime now) override {
    metrics_->on_delivered(pkt.flow, pkt.payload_bytes, now);
    if (trace_) trace_->emit(now, "d1", "deliver", pkt.flow, pkt.seq);
  }

 private:
  MetricsRegistry* metrics_;
  TraceLog* trace_;
};

// The egress edge of the source domain: every foreground packet takes one
// pass through the configured marker; the background aggregate keeps its own
// code point and stays outside the profile.
class MarkingNode final : public PacketHandler {
 public:
  MarkingNode(Marker* marker, MetricsRegistry* metrics, PacketHandler* next,
              const std::unordered_map<FlowId, bool>* is_background, TraceLog* trace)
      : marker_(marker), metrics_(metrics), next_(next), is_background_(is_background),
        trace_(trace) {}

  void handle(Packet pkt, SimTime now) override {
    if (is_background_->at(pkt.flow)) {
      pkt.mark = Mark::Background;
    } else {
      pkt.mark = marker_->mark(pkt, now);
      metrics_->on_marked(pkt, pkt.mark);
    }
    if (trace_) trace_->emit(now, "e1", std::string("mark_") + mark_name(pkt.mark), pkt.flow, pkt.seq);
    next_->handle(pkt, now);
  }

 private:
  Marker* marker_;
  MetricsRegistry* metrics_;
  PacketHandler* next_;
  const std::unordered_map<FlowId, bool>* is_background_;
  TraceLog* trace_;
};

}  // namespace

struct ScenarioRun::Impl {
  ScenarioConfig cfg;
  std::string marker_type;
  Simulator sim;
  RngFactory rng;
  TraceLog trace;
  MetricsRegistry metrics;

  std::unique_ptr<Marker> marker;
  std::vector<std::unique_ptr<Link>> links;
  std::vector<std::unique_ptr<PacketHandler>> nodes;
  std::vector<std::unique_ptr<TcpSender>> senders;
  std::vector<std::unique_ptr<TcpReceiver>> receivers;
  std::vector<std::unique_ptr<UdpCbrSource>> udp_sources;
  std::map<FlowId, FlowRateStamper> stampers;
  std::unordered_map<FlowId, bool> is_background;
  std::vector<std::pair<FlowId, SimTime>> schedule;

  FlowDemux* d1_demux = nullptr;
  FlowDemux* d2_demux = nullptr;
  FlowDemux* s1_acks = nullptr;
  FlowDemux* s3_acks = nullptr;
  Link* from_s1 = nullptr;
  Link* from_s2 = nullptr;
  Link* from_s3 = nullptr;
  Link* to_s1_rev = nullptr;
  Link* to_s3_rev = nullptr;
  Link* ack_entry_d1 = nullptr;
  Link* ack_entry_d2 = nullptr;
  UdpSink* udp_sink = nullptr;
  FlowId next_flow_id = 0;

  Impl(const ScenarioConfig& c, std::string mtype, std::uint64_t run_seed, std::ostream* trace_out)
      : cfg(c), marker_type(std::move(mtype)), rng(run_seed),
        metrics(c.duration_s * c.metrics.warmup_fraction, c.duration_s) {
    require_valid(cfg);
    if (trace_out) trace.attach(trace_out);
    marker = make_marker(cfg.marker, marker_type, rng.stream("marker"));
    build_topology();
    build_sources();
  }

  TraceLog* tr() { return trace.enabled() ? &trace : nullptr; }

  Link* add_link(const std::string& name, double bw, const QueueConfig& qcfg,
                 PacketHandler* next) {
    auto queue = make_queue(qcfg, rng.stream("queue", links.size()), bw);
    links.push_back(
        std::make_unique<Link>(sim, name, bw, cfg.topology.link_delay_s, std::move(queue), next, tr()));
    return links.back().get();
  }

  void build_topology() {
    const TopologyConfig& t = cfg.topology;
    const QueueConfig& eq = t.edge_queue;

    auto d1 = std::make_unique<FlowDemux>();
    auto d2 = std::make_unique<FlowDemux>();
    d1_demux = d1.get();
    d2_demux = d2.get();
    auto s1a = std::make_unique<FlowDemux>();
    auto s3a = std::make_unique<FlowDemux>();
    s1_acks = s1a.get();
    s3_acks = s3a.get();

    // Reverse path: d -> e2 -> core -> e1 -> s, DropTail edges only.
    auto e1_rev = std::make_unique<RouteNode>([this](const Packet& p) -> PacketHandler* {
      return is_background.at(p.flow) ? static_cast<PacketHandler*>(to_s3_rev)
                                      : static_cast<PacketHandler*>(to_s1_rev);
    });
    to_s1_rev = add_link("e1-s1", t.access_bandwidth_bps, eq, s1_acks);
    to_s3_rev = add_link("e1-s3", t.access_bandwidth_bps, eq, s3_acks);
    Link* core_e1 = add_link("core-e1", t.access_bandwidth_bps, eq, e1_rev.get());
    Link* e2_core = add_link("e2-core", t.access_bandwidth_bps, eq, core_e1);
    ack_entry_d1 = add_link("d1-e2", t.access_bandwidth_bps, eq, e2_core);
    ack_entry_d2 = add_link("d2-e2", t.access_bandwidth_bps, eq, e2_core);

    // Forward path: s -> e1 [marker] -> core -> bottleneck -> e2 -> d.
    Link* e2_d1 = add_link("e2-d1", t.access_bandwidth_bps, eq, d1_demux);
    Link* e2_d2 = add_link("e2-d2", t.access_bandwidth_bps, eq, d2_demux);
    auto e2_node = std::make_unique<RouteNode>([this, e2_d1, e2_d2](const Packet& p) {
      return is_background.at(p.flow) ? e2_d2 : e2_d1;
    });
    Link* core_e2 =
        add_link("core-e2", t.bottleneck_bandwidth_bps, t.core_queue, e2_node.get());
    core_e2->on_drop = [this](const Packet& p, SimTime) { metrics.on_core_drop(p); };
    Link* e1_core = add_link("e1-core", t.access_bandwidth_bps, eq, core_e2);
    auto e1_node =
        std::make_unique<MarkingNode>(marker.get(), &metrics, e1_core, &is_background, tr());
    from_s1 = add_link("s1-e1", t.access_bandwidth_bps, eq, e1_node.get());
    from_s2 = add_link("s2-e1", t.access_bandwidth_bps, eq, e1_node.get());
    from_s3 = add_link("s3-e1", t.access_bandwidth_bps, eq, e1_node.get());

    auto sink = std::make_unique<UdpSink>(&metrics, tr());
    udp_sink = sink.get();

    nodes.push_back(std::move(d1));
    nodes.push_back(std::move(d2));
    nodes.push_back(std::move(s1a));
    nodes.push_back(std::move(s3a));
    nodes.push_back(std::move(e1_rev));
    nodes.push_back(std::move(e2_node));
    nodes.push_back(std::move(e1_node));
    nodes.push_back(std::move(sink));
  }

  void register_flow(FlowId flow, const std::string& kind, SimTime start) {
    metrics.register_flow(flow, kind, start);
    is_background[flow] = kind == "background";
    schedule.emplace_back(flow, start);
  }

  // Sender/receiver pair plus stamping, metrics and ack wiring for one TCP
  // flow. Background flows bypass the ingress stamper and sink at d2.
  void wire_tcp_flow(FlowId flow, bool background, SimTime start, std::int64_t payload_bytes) {
    auto receiver = std::make_unique<TcpReceiver>(flow, TcpParams{}.ack_size_bytes,
                                                  background ? ack_entry_d2 : ack_entry_d1);
    receiver->on_deliver = [this, flow](std::int64_t bytes, SimTime now) {
      metrics.on_delivered(flow, bytes, now);
    };

    auto sender = std::make_unique<TcpSender>(sim, flow, TcpParams{},
                                              background ? from_s3 : from_s1, payload_bytes, start);
    if (!background) stampers.emplace(flow, FlowRateStamper(cfg.marker.fsam.k_est_seconds));
    sender->on_emit = [this, flow, background](Packet& pkt, SimTime now) {
      if (!background) stampers.at(flow).stamp(pkt, now);
      metrics.on_emitted(pkt, now);
      if (trace.enabled()) trace.emit(now, background ? "s3" : "s1", "emit", flow, pkt.seq);
    };
    if (payload_bytes >= 0) {
      sender->on_complete = [this, flow](SimTime now) { metrics.on_completed(flow, now); };
    }

    (background ? d2_demux : d1_demux)->add(flow, receiver.get());
    (background ? s3_acks : s1_acks)->add(flow, sender.get());
    receivers.push_back(std::move(receiver));
    senders.push_back(std::move(sender));
  }

  void add_udp_flow(const SourceConfig& src, Rng& jitter_stream) {
    const FlowId flow = next_flow_id++;
    const double gap = cbr_gap_seconds(src.rate_bps, src.pkt_size_bytes);
    const double offset = src.start_jitter ? jitter_stream.uniform01() * gap : 0.0;
    const SimTime start = src.start_s + offset;
    register_flow(flow, "udp", start);

    stampers.emplace(flow, FlowRateStamper(cfg.marker.fsam.k_est_seconds));
    auto source = std::make_unique<UdpCbrSource>(sim, flow, src.rate_bps, src.pkt_size_bytes,
                                                 start, src.stop_s, from_s2);
    source->on_emit = [this, flow](Packet& pkt, SimTime now) {
      stampers.at(flow).stamp(pkt, now);
      metrics.on_emitted(pkt, now);
      if (trace.enabled()) trace.emit(now, "s2", "emit", flow, pkt.seq);
    };
    d1_demux->add(flow, udp_sink);
    udp_sources.push_back(std::move(source));
  }

  void build_sources() {
    int short_block = 0;
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
      const SourceConfig& src = cfg.sources[i];
      if (src.type == "tcp_bulk") {
        for (int k = 0; k < src.count; ++k) {
          const FlowId flow = next_flow_id++;
          const SimTime start = src.start_s + k * src.stagger_s;
          register_flow(flow, "tcp_bulk", start);
          wire_tcp_flow(flow, false, start, -1);
        }
      } else if (src.type == "udp_cbr") {
        Rng jitter = rng.stream("udp_jitter", i);
        for (int k = 0; k < src.count; ++k) add_udp_flow(src, jitter);
      } else if (src.type == "tcp_short") {
        Rng stream = rng.stream("short_sessions", static_cast<std::uint64_t>(short_block++));
        const std::vector<SimTime> sessions =
            poisson_schedule(stream, src.mean_interarrival_s, src.start_s, src.stop_s);
        for (SimTime at : sessions) {
          const FlowId flow = next_flow_id++;
          register_flow(flow, "tcp_short", at);
          const auto payload = static_cast<std::int64_t>(src.payload_bytes);
          // Flow ids and start times are fixed now; the transfer itself is
          // wired when the session begins.
          sim.schedule(at, [this, flow, payload] { wire_tcp_flow(flow, false, sim.now(), payload); });
        }
      }
    }
    // Background elephants exist to desynchronize the foreground; spread
    // their own starts so they do not synchronize against each other.
    for (int k = 0; k < cfg.background_flows; ++k) {
      const FlowId flow = next_flow_id++;
      const SimTime start = 0.1 + 0.5 * k;
      register_flow(flow, "background", start);
      wire_tcp_flow(flow, true, start, -1);
    }
  }
};

ScenarioRun::ScenarioRun(const ScenarioConfig& cfg, const std::string& marker_type,
                         std::uint64_t run_seed, std::ostream* trace)
    : impl_(std::make_unique<Impl>(cfg, marker_type, run_seed, trace)) {}

ScenarioRun::~ScenarioRun() = default;

void ScenarioRun::run() {
  impl_->sim.run_until(impl_->cfg.duration_s);
  for (const auto& sender : impl_->senders) {
    FlowStats& fs = impl_->metrics.flow(sender->flow());
    fs.tcp_timeouts = sender->timeouts();
    fs.tcp_fast_retransmits = sender->fast_retransmits();
  }
}

const MetricsRegistry& ScenarioRun::metrics() const { return impl_->metrics; }

std::vector<FlowRecord> ScenarioRun::flow_records() const {
  std::vector<FlowRecord> out;
  const double window = impl_->metrics.window_seconds();
  const SimTime end = impl_->metrics.run_end();
  const std::vector<FlowStats> rows = impl_->metrics.rows();
  out.reserve(rows.size());
  for (const FlowStats& fs : rows) {
    FlowRecord rec;
    rec.stats = fs;
    if (fs.kind == "tcp_short") {
      // A transfer's rate is judged over its own lifetime: completed mice
      // deliver the same byte count under every marker, so only the time to
      // deliver it can distinguish markers.
      const SimTime done = fs.completed >= 0.0 ? fs.completed : end;
      const double span = done - fs.start;
      rec.throughput_bps = span > 0.0 ? throughput_bps(fs.bytes_delivered_total, span) : 0.0;
    } else {
      rec.throughput_bps = throughput_bps(fs.bytes_delivered, window);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<GroupSummary> ScenarioRun::summaries() const {
  const std::vector<FlowRecord> records = flow_records();
  return summarize(records);
}

std::vector<std::pair<FlowId, SimTime>> ScenarioRun::source_schedule() const {
  return impl_->schedule;
}

bool ScenarioRun::links_conserve(std::string* detail) const {
  for (const auto& link : impl_->links) {
    if (!link->conserves()) {
      if (detail) *detail = link->name();
      return false;
    }
  }
  return true;
}

namespace {

void csv_append_flow_rows(std::string& out, const RunOutput& run) {
  for (const FlowRecord& r : run.flows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%s,%" PRId64 ",%" PRId64 ",%" PRId64 ",%.3f\n",
                  run.scenario.c_str(), run.marker.c_str(), run.replication, r.stats.flow,
                  r.stats.kind.c_str(), r.stats.pkts_in, r.stats.pkts_out, r.stats.bytes_delivered,
                  r.throughput_bps);
    out += buf;
  }
}

void csv_append_summary_rows(std::string& out, const RunOutput& run) {
  // undefined fairness indices (all-zero groups) serialize as nan
  auto fi_str = [](double fi) {
    char buf[32];
    if (fi < 0.0) {
      std::snprintf(buf, sizeof(buf), "nan");
    } else {
      std::snprintf(buf, sizeof(buf), "%.6f", fi);
    }
    return std::string(buf);
  };
  for (const GroupSummary& g : run.groups) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%s,%.3f,%.3f,%s,%s\n", run.scenario.c_str(),
                  run.marker.c_str(), run.replication, g.group.c_str(), g.mean_bps, g.stddev_bps,
                  fi_str(g.fi_throughput).c_str(), fi_str(g.fi_in_tokens).c_str());
    out += buf;
  }
}

constexpr const char* kFlowsHeader =
    "scenario,marker,replication,flow_id,flow_kind,pkts_in,pkts_out,bytes_delivered,"
    "throughput_bps\n";
constexpr const char* kSummaryHeader =
    "scenario,marker,replication,group,mean_bps,stddev_bps,fi_throughput,fi_in_tokens\n";

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Prefixes every line of `rows` with "param,value," and appends to dst.
void append_prefixed(std::string& dst, const std::string& prefix, const std::string& rows) {
  std::size_t pos = 0;
  while (pos < rows.size()) {
    const std::size_t nl = rows.find('\n', pos);
    dst += prefix;
    dst += rows.substr(pos, nl - pos);
    dst += '\n';
    pos = nl + 1;
  }
}

}  // namespace

ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& opts) {
  require_valid(cfg);
  ExperimentResult result;
  result.flows_csv = kFlowsHeader;
  result.summary_csv = kSummaryHeader;

  const RngFactory seeds(cfg.seed);
  for (const std::string& marker : cfg.markers) {
    for (int rep = 0; rep < cfg.replications; ++rep) {
      std::ofstream trace_file;
      std::ostream* trace = nullptr;
      if (!opts.trace_dir.empty()) {
        const std::string path = opts.trace_dir + "/" + cfg.name + "_" + marker + "_rep" +
                                 std::to_string(rep) + ".trace";
        trace_file.open(path, std::ios::binary);
        if (!trace_file) throw std::runtime_error("cannot write " + path);
        trace = &trace_file;
      }

      ScenarioRun sim(cfg, marker, seeds.derive_seed(static_cast<std::uint64_t>(rep)), trace);
      sim.run();
      std::string bad_link;
      if (!sim.links_conserve(&bad_link)) {
        throw std::logic_error("link conservation violated on " + bad_link);
      }

      RunOutput out;
      out.scenario = cfg.name;
      out.marker = marker;
      out.replication = rep;
      out.flows = sim.flow_records();
      out.groups = sim.summaries();
      csv_append_flow_rows(result.flows_csv, out);
      csv_append_summary_rows(result.summary_csv, out);
      result.runs.push_back(std::move(out));
    }
  }
  return result;
}

void write_experiment(const ExperimentResult& result, const std::string& scenario_name,
                      const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/" + scenario_name + "_flows.csv", result.flows_csv);
  write_file(out_dir + "/" + scenario_name + "_summary.csv", result.summary_csv);
}

SweepResult sweep(const ScenarioConfig& cfg, const std::string& json_pointer,
                  const std::vector<double>& values, const ExperimentOptions& opts) {
  if (values.empty()) throw std::invalid_argument("sweep: no values given");
  nlohmann::json base = nlohmann::json::parse(serialize_scenario(cfg));
  nlohmann::json::json_pointer ptr;
  try {
    ptr = nlohmann::json::json_pointer(json_pointer);
  } catch (const std::exception& e) {
    throw std::invalid_argument("sweep: bad parameter path '" + json_pointer + "': " + e.what());
  }
  if (!base.contains(ptr) || !base.at(ptr).is_number()) {
    throw std::invalid_argument("sweep: parameter path '" + json_pointer +
                                "' does not resolve to a numeric field");
  }
  const bool integral = base.at(ptr).is_number_integer();

  SweepResult result;
  result.param = json_pointer;
  result.flows_csv = std::string("param,value,") + kFlowsHeader;
  result.summary_csv = std::string("param,value,") + kSummaryHeader;

  for (double v : values) {
    nlohmann::json patched = base;
    if (integral) {
      patched[ptr] = static_cast<std::int64_t>(std::llround(v));
    } else {
      patched[ptr] = v;
    }
    ScenarioConfig point_cfg = parse_scenario(patched.dump());
    ExperimentResult res = run_experiment(point_cfg, opts);

    char value_str[64];
    std::snprintf(value_str, sizeof(value_str), "%.6g", v);
    const std::string prefix = json_pointer + "," + value_str + ",";
    for (const RunOutput& run : res.runs) {
      std::string flows, summary;
      csv_append_flow_rows(flows, run);
      csv_append_summary_rows(summary, run);
      append_prefixed(result.flows_csv, prefix, flows);
      append_prefixed(result.summary_csv, prefix, summary);
    }
    result.points.push_back(SweepPoint{v, std::move(res)});
  }
  return result;
}

void write_sweep(const SweepResult& result, const std::string& scenario_name,
                 const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/" + scenario_name + "_sweep_flows.csv", result.flows_csv);
  write_file(out_dir + "/" + scenario_name + "_sweep_summary.csv", result.summary_csv);
}

}  // namespace marksim
