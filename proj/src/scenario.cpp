#include "marksim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace marksim {

using nlohmann::json;

namespace {

json red_to_json(const RedParams& p) {
  return json{{"min_th_pkts", p.min_th_pkts},
              {"max_th_pkts", p.max_th_pkts},
              {"max_p", p.max_p},
              {"ewma_weight", p.ewma_weight}};
}

RedParams red_from_json(const json& j, const RedParams& defaults) {
  RedParams p = defaults;
  p.min_th_pkts = j.value("min_th_pkts", p.min_th_pkts);
  p.max_th_pkts = j.value("max_th_pkts", p.max_th_pkts);
  p.max_p = j.value("max_p", p.max_p);
  p.ewma_weight = j.value("ewma_weight", p.ewma_weight);
  return p;
}

json queue_to_json(const QueueConfig& q) {
  return json{{"discipline", q.discipline},
              {"capacity_pkts", q.capacity_pkts},
              {"red", red_to_json(q.red)},
              {"rio_in", red_to_json(q.rio_in)},
              {"rio_out", red_to_json(q.rio_out)}};
}

QueueConfig queue_from_json(const json& j, QueueConfig q) {
  q.discipline = j.value("discipline", q.discipline);
  q.capacity_pkts = j.value("capacity_pkts", q.capacity_pkts);
  if (j.contains("red")) q.red = red_from_json(j.at("red"), q.red);
  if (j.contains("rio_in")) q.rio_in = red_from_json(j.at("rio_in"), q.rio_in);
  if (j.contains("rio_out")) q.rio_out = red_from_json(j.at("rio_out"), q.rio_out);
  return q;
}

json source_to_json(const SourceConfig& s) {
  return json{{"type", s.type},
              {"count", s.count},
              {"start_s", s.start_s},
              {"stop_s", s.stop_s},
              {"stagger_s", s.stagger_s},
              {"rate_bps", s.rate_bps},
              {"pkt_size_bytes", s.pkt_size_bytes},
              {"start_jitter", s.start_jitter},
              {"mean_interarrival_s", s.mean_interarrival_s},
              {"payload_bytes", s.payload_bytes}};
}

SourceConfig source_from_json(const json& j) {
  SourceConfig s;
  s.type = j.value("type", s.type);
  s.count = j.value("count", s.count);
  s.start_s = j.value("start_s", s.start_s);
  s.stop_s = j.value("stop_s", s.stop_s);
  s.stagger_s = j.value("stagger_s", s.stagger_s);
  s.rate_bps = j.value("rate_bps", s.rate_bps);
  s.pkt_size_bytes = j.value("pkt_size_bytes", s.pkt_size_bytes);
  s.start_jitter = j.value("start_jitter", s.start_jitter);
  s.mean_interarrival_s = j.value("mean_interarrival_s", s.mean_interarrival_s);
  s.payload_bytes = j.value("payload_bytes", s.payload_bytes);
  return s;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("scenario: invalid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.name = j.value("name", cfg.name);
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.replications = j.value("replications", cfg.replications);
  if (j.contains("markers")) cfg.markers = j.at("markers").get<std::vector<std::string>>();

  if (j.contains("marker")) {
    const json& m = j.at("marker");
    cfg.marker.cir_bps = m.value("cir_bps", cfg.marker.cir_bps);
    cfg.marker.burst_bytes = m.value("burst_bytes", cfg.marker.burst_bytes);
    cfg.marker.ewma_weight = m.value("ewma_weight", cfg.marker.ewma_weight);
    if (m.contains("pam")) {
      const json& p = m.at("pam");
      cfg.marker.pam.min_th_bytes = p.value("min_th_bytes", cfg.marker.pam.min_th_bytes);
      cfg.marker.pam.max_th_bytes = p.value("max_th_bytes", cfg.marker.pam.max_th_bytes);
      cfg.marker.pam.p_max = p.value("p_max", cfg.marker.pam.p_max);
      cfg.marker.pam.p_min = p.value("p_min", cfg.marker.pam.p_min);
      cfg.marker.pam.use_instantaneous =
          p.value("use_instantaneous", cfg.marker.pam.use_instantaneous);
    }
    if (m.contains("fsam")) {
      const json& f = m.at("fsam");
      cfg.marker.fsam.k_est_seconds = f.value("k_est_seconds", cfg.marker.fsam.k_est_seconds);
      cfg.marker.fsam.k_c_seconds = f.value("k_c_seconds", cfg.marker.fsam.k_c_seconds);
      cfg.marker.fsam.alpha_clamp_factor =
          f.value("alpha_clamp_factor", cfg.marker.fsam.alpha_clamp_factor);
    }
    if (m.contains("tsw2cm")) {
      cfg.marker.tsw2cm.win_length_s =
          m.at("tsw2cm").value("win_length_s", cfg.marker.tsw2cm.win_length_s);
    }
  }
  // Thresholds default to a continuous ramp across the bucket.
  if (cfg.marker.pam.min_th_bytes < 0.0) cfg.marker.pam.min_th_bytes = 0.1 * cfg.marker.burst_bytes;
  if (cfg.marker.pam.max_th_bytes < 0.0) cfg.marker.pam.max_th_bytes = 0.9 * cfg.marker.burst_bytes;

  if (j.contains("topology")) {
    const json& t = j.at("topology");
    cfg.topology.access_bandwidth_bps =
        t.value("access_bandwidth_bps", cfg.topology.access_bandwidth_bps);
    cfg.topology.bottleneck_bandwidth_bps =
        t.value("bottleneck_bandwidth_bps", cfg.topology.bottleneck_bandwidth_bps);
    cfg.topology.link_delay_s = t.value("link_delay_s", cfg.topology.link_delay_s);
    if (t.contains("edge_queue")) {
      cfg.topology.edge_queue = queue_from_json(t.at("edge_queue"), cfg.topology.edge_queue);
    }
    if (t.contains("core_queue")) {
      cfg.topology.core_queue = queue_from_json(t.at("core_queue"), cfg.topology.core_queue);
    }
  }

  if (j.contains("sources")) {
    cfg.sources.clear();
    for (const json& s : j.at("sources")) cfg.sources.push_back(source_from_json(s));
  }
  for (SourceConfig& s : cfg.sources) {
    if (s.stop_s < 0.0) s.stop_s = cfg.duration_s;
  }

  cfg.background_flows = j.value("background_flows", cfg.background_flows);
  if (j.contains("metrics")) {
    cfg.metrics.warmup_fraction =
        j.at("metrics").value("warmup_fraction", cfg.metrics.warmup_fraction);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  json sources = json::array();
  for (const SourceConfig& s : cfg.sources) sources.push_back(source_to_json(s));

  json j{{"name", cfg.name},
         {"duration_s", cfg.duration_s},
         {"seed", cfg.seed},
         {"replications", cfg.replications},
         {"markers", cfg.markers},
         {"marker",
          {{"cir_bps", cfg.marker.cir_bps},
           {"burst_bytes", cfg.marker.burst_bytes},
           {"ewma_weight", cfg.marker.ewma_weight},
           {"pam",
            {{"min_th_bytes", cfg.marker.pam.min_th_bytes},
             {"max_th_bytes", cfg.marker.pam.max_th_bytes},
             {"p_max", cfg.marker.pam.p_max},
             {"p_min", cfg.marker.pam.p_min},
             {"use_instantaneous", cfg.marker.pam.use_instantaneous}}},
           {"fsam",
            {{"k_est_seconds", cfg.marker.fsam.k_est_seconds},
             {"k_c_seconds", cfg.marker.fsam.k_c_seconds},
             {"alpha_clamp_factor", cfg.marker.fsam.alpha_clamp_factor}}},
           {"tsw2cm", {{"win_length_s", cfg.marker.tsw2cm.win_length_s}}}}},
         {"topology",
          {{"access_bandwidth_bps", cfg.topology.access_bandwidth_bps},
           {"bottleneck_bandwidth_bps", cfg.topology.bottleneck_bandwidth_bps},
           {"link_delay_s", cfg.topology.link_delay_s},
           {"edge_queue", queue_to_json(cfg.topology.edge_queue)},
           {"core_queue", queue_to_json(cfg.topology.core_queue)}}},
         {"sources", sources},
         {"background_flows", cfg.background_flows},
         {"metrics", {{"warmup_fraction", cfg.metrics.warmup_fraction}}}};
  return j.dump(2) + "\n";
}

std::vector<std::string> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<std::string> errors;
  auto check = [&errors](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  static const std::set<std::string> kMarkers{"tb", "pam", "fsam", "tsw2cm"};
  static const std::set<std::string> kDisciplines{"droptail", "red", "rio"};
  static const std::set<std::string> kSourceTypes{"tcp_bulk", "tcp_short", "udp_cbr"};

  check(!cfg.name.empty(), "name: must be non-empty");
  check(cfg.duration_s > 0.0, "duration_s: must be > 0");
  check(cfg.replications >= 1, "replications: must be >= 1");
  check(!cfg.markers.empty(), "markers: must name at least one marker");
  for (const std::string& m : cfg.markers) {
    check(kMarkers.count(m) == 1, "markers: unknown marker '" + m + "'");
  }

  check(cfg.marker.cir_bps > 0.0, "marker.cir_bps: must be > 0");
  check(cfg.marker.burst_bytes > 0.0, "marker.burst_bytes: must be > 0");
  check(cfg.marker.ewma_weight > 0.0 && cfg.marker.ewma_weight <= 1.0,
        "marker.ewma_weight: must be in (0, 1]");
  const PamConfig& pam = cfg.marker.pam;
  check(pam.min_th_bytes >= 0.0 && pam.min_th_bytes < pam.max_th_bytes,
        "marker.pam: requires 0 <= min_th < max_th");
  check(pam.max_th_bytes <= cfg.marker.burst_bytes, "marker.pam.max_th_bytes: must be <= burst");
  check(pam.p_min >= 0.0 && pam.p_min <= pam.p_max && pam.p_max <= 1.0,
        "marker.pam: requires 0 <= p_min <= p_max <= 1");
  check(cfg.marker.fsam.k_est_seconds > 0.0, "marker.fsam.k_est_seconds: must be > 0");
  check(cfg.marker.fsam.k_c_seconds > 0.0, "marker.fsam.k_c_seconds: must be > 0");
  check(cfg.marker.fsam.alpha_clamp_factor > 1.0, "marker.fsam.alpha_clamp_factor: must be > 1");
  check(cfg.marker.tsw2cm.win_length_s > 0.0, "marker.tsw2cm.win_length_s: must be > 0");

  check(cfg.topology.access_bandwidth_bps > 0.0, "topology.access_bandwidth_bps: must be > 0");
  check(cfg.topology.bottleneck_bandwidth_bps > 0.0,
        "topology.bottleneck_bandwidth_bps: must be > 0");
  check(cfg.topology.link_delay_s >= 0.0, "topology.link_delay_s: must be >= 0");
  auto check_queue = [&](const QueueConfig& q, const std::string& path) {
    check(kDisciplines.count(q.discipline) == 1,
          path + ".discipline: unknown discipline '" + q.discipline + "'");
    check(q.capacity_pkts > 0, path + ".capacity_pkts: must be > 0");
    auto check_red = [&](const RedParams& p, const std::string& rp) {
      check(p.min_th_pkts >= 0.0 && p.min_th_pkts < p.max_th_pkts,
            rp + ": requires 0 <= min_th < max_th");
      check(p.max_th_pkts <= q.capacity_pkts, rp + ".max_th_pkts: must be <= capacity");
      check(p.max_p > 0.0 && p.max_p <= 1.0, rp + ".max_p: must be in (0, 1]");
      check(p.ewma_weight > 0.0 && p.ewma_weight <= 1.0, rp + ".ewma_weight: must be in (0, 1]");
    };
    if (q.discipline == "red") check_red(q.red, path + ".red");
    if (q.discipline == "rio") {
      check_red(q.rio_in, path + ".rio_in");
      check_red(q.rio_out, path + ".rio_out");
    }
  };
  check_queue(cfg.topology.edge_queue, "topology.edge_queue");
  check_queue(cfg.topology.core_queue, "topology.core_queue");

  check(!cfg.sources.empty(), "sources: must contain at least one traffic block");
  for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
    const SourceConfig& s = cfg.sources[i];
    const std::string path = "sources[" + std::to_string(i) + "]";
    check(kSourceTypes.count(s.type) == 1, path + ".type: unknown type '" + s.type + "'");
    check(s.count >= 1, path + ".count: must be >= 1");
    check(s.start_s >= 0.0 && s.start_s < cfg.duration_s,
          path + ".start_s: must be in [0, duration)");
    check(s.stop_s > s.start_s, path + ".stop_s: must be > start_s");
    if (s.type == "udp_cbr") {
      check(s.rate_bps > 0.0, path + ".rate_bps: must be > 0");
      check(s.pkt_size_bytes > 0, path + ".pkt_size_bytes: must be > 0");
    }
    if (s.type == "tcp_short") {
      check(s.mean_interarrival_s > 0.0, path + ".mean_interarrival_s: must be > 0");
      check(s.payload_bytes > 0, path + ".payload_bytes: must be > 0");
    }
  }

  check(cfg.background_flows >= 0, "background_flows: must be >= 0");
  check(cfg.metrics.warmup_fraction >= 0.0 && cfg.metrics.warmup_fraction < 1.0,
        "metrics.warmup_fraction: must be in [0, 1)");
  return errors;
}

void require_valid(const ScenarioConfig& cfg) {
  const std::vector<std::string> errors = validate_scenario(cfg);
  if (errors.empty()) return;
  std::string msg = "scenario '" + cfg.name + "' is invalid:";
  for (const std::string& e : errors) msg += "\n  - " + e;
  throw std::runtime_error(msg);
}

}  // namespace marksim
