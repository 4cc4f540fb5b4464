#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "marksim/aqm.hpp"

namespace marksim {

// Queue attached to a link: droptail | red | rio.
struct QueueConfig {
  std::string discipline = "droptail";
  int capacity_pkts = 100;
  RedParams red{40, 70, 0.02, 0.002};       // single-curve red
  RedParams rio_in{40, 70, 0.02, 0.002};    // rio, In curve
  RedParams rio_out{10, 30, 0.5, 0.002};    // rio, Out curve

  bool operator==(const QueueConfig&) const = default;
};

struct TopologyConfig {
  double access_bandwidth_bps = 1.0e7;      // every link except the bottleneck
  double bottleneck_bandwidth_bps = 5.0e6;  // core -> egress edge
  double link_delay_s = 0.005;
  QueueConfig edge_queue{.discipline = "droptail", .capacity_pkts = 500};
  QueueConfig core_queue{.discipline = "rio", .capacity_pkts = 100};

  bool operator==(const TopologyConfig&) const = default;
};

struct PamConfig {
  double min_th_bytes = -1.0;  // < 0: resolved to 0.1 * burst at parse time
  double max_th_bytes = -1.0;  // < 0: resolved to 0.9 * burst
  double p_max = 1.0;
  double p_min = 0.0;
  bool use_instantaneous = false;

  bool operator==(const PamConfig&) const = default;
};

struct FsamConfig {
  double k_est_seconds = 0.1;
  double k_c_seconds = 0.2;
  double alpha_clamp_factor = 2.0;

  bool operator==(const FsamConfig&) const = default;
};

struct Tsw2cmConfig {
  double win_length_s = 1.0;

  bool operator==(const Tsw2cmConfig&) const = default;
};

struct MarkerConfig {
  double cir_bps = 500000.0;
  double burst_bytes = 12500.0;
  double ewma_weight = 0.002;
  PamConfig pam;
  FsamConfig fsam;
  Tsw2cmConfig tsw2cm;

  bool operator==(const MarkerConfig&) const = default;
};

// One traffic block. tcp_bulk and tcp_short attach to source node s1,
// udp_cbr to s2; all foreground flows sink at d1.
struct SourceConfig {
  std::string type;  // tcp_bulk | tcp_short | udp_cbr
  int count = 1;
  double start_s = 0.0;
  double stop_s = -1.0;     // < 0: run end
  double stagger_s = 0.05;  // per-flow start offset within a tcp_bulk block
  // udp_cbr
  double rate_bps = 1.0e6;
  int pkt_size_bytes = 1000;
  bool start_jitter = true;  // randomize phase within one inter-packet gap
  // tcp_short
  double mean_interarrival_s = 1.0;
  int payload_bytes = 20480;

  bool operator==(const SourceConfig&) const = default;
};

struct MetricsConfig {
  double warmup_fraction = 0.1;

  bool operator==(const MetricsConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration_s = 40.0;
  std::uint64_t seed = 1;
  int replications = 10;
  std::vector<std::string> markers{"tb"};
  MarkerConfig marker;
  TopologyConfig topology;
  std::vector<SourceConfig> sources;
  int background_flows = 0;  // bulk TCP flows s3 -> d2, outside the profile
  MetricsConfig metrics;

  bool operator==(const ScenarioConfig&) const = default;
};

// Parse/serialize. Parsing materializes defaults (including the PAM
// thresholds derived from the burst), so parse(serialize(parse(x))) is the
// identity on configs.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& cfg);

// Full field-by-field validation; empty result means the config is runnable.
std::vector<std::string> validate_scenario(const ScenarioConfig& cfg);

// Throws with every violation listed, one per line.
void require_valid(const ScenarioConfig& cfg);

}  // namespace marksim
