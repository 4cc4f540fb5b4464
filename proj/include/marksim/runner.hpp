#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "marksim/metrics.hpp"
#include "marksim/scenario.hpp"

namespace marksim {

// One wired simulation instance: the dumbbell of the scenario schema.
//
//   s1 (tcp) --\                               /-- d1 (foreground sinks)
//   s2 (udp) ---- e1 [marker] -- core --==-- e2
//   s3 (bkgd) --/             (bottleneck, core queue)  \-- d2 (background sink)
//
// The marker sits at the egress of edge e1; the core queue discipline guards
// the core->e2 bottleneck; acks return over DropTail reverse links.
class ScenarioRun {
 public:
  ScenarioRun(const ScenarioConfig& cfg, const std::string& marker_type, std::uint64_t run_seed,
              std::ostream* trace = nullptr);
  ~ScenarioRun();
  ScenarioRun(const ScenarioRun&) = delete;
  ScenarioRun& operator=(const ScenarioRun&) = delete;

  void run();

  const MetricsRegistry& metrics() const;
  std::vector<FlowRecord> flow_records() const;
  std::vector<GroupSummary> summaries() const;

  // Flow start times as scheduled from the seed (static flows and short-flow
  // sessions). Identical across markers for one (seed, replication).
  std::vector<std::pair<FlowId, SimTime>> source_schedule() const;

  // Every link satisfies injected == delivered + dropped + in transit.
  bool links_conserve(std::string* detail = nullptr) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct RunOutput {
  std::string scenario;
  std::string marker;
  int replication = 0;
  std::vector<FlowRecord> flows;
  std::vector<GroupSummary> groups;
};

struct ExperimentResult {
  std::vector<RunOutput> runs;
  std::string flows_csv;
  std::string summary_csv;
};

struct ExperimentOptions {
  std::string trace_dir;  // when set, writes one trace file per run
};

// Runs every configured marker for `replications` seeded runs. Replication k
// uses the same derived seed for every marker, so source-side randomness is
// paired across markers.
ExperimentResult run_experiment(const ScenarioConfig& cfg, const ExperimentOptions& opts = {});

// Writes <name>_flows.csv and <name>_summary.csv under out_dir.
void write_experiment(const ExperimentResult& result, const std::string& scenario_name,
                      const std::string& out_dir);

struct SweepPoint {
  double value = 0.0;
  ExperimentResult result;
};

struct SweepResult {
  std::string param;
  std::vector<SweepPoint> points;
  std::string flows_csv;
  std::string summary_csv;
};

// Re-runs the experiment once per value with the numeric field at
// `json_pointer` (e.g. "/sources/0/count") replaced. Refuses paths that do
// not resolve to a numeric field.
SweepResult sweep(const ScenarioConfig& cfg, const std::string& json_pointer,
                  const std::vector<double>& values, const ExperimentOptions& opts = {});

void write_sweep(const SweepResult& result, const std::string& scenario_name,
                 const std::string& out_dir);

}  // namespace marksim
