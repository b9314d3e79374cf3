#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtrx/flows/flow.hpp"
#include "rtrx/flows/flow_table.hpp"
#include "rtrx/nic/mq_nic.hpp"
#include "rtrx/rxstack/cost_model.hpp"
#include "rtrx/rxstack/rxstack.hpp"
#include "rtrx/traffic/source.hpp"

namespace rtrx::harness {

// Scenario files are plain text: one `key value` pair per line, nested
// sections opened with `kind [name] {` and closed with `}`, comments from
// `#`. See README for the schema.
struct ScenarioError : std::runtime_error {
  ScenarioError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_no(line) {}
  int line_no;
};

struct ConfigNode {
  std::string kind;
  std::string name;
  int line = 0;
  struct KV {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<KV> entries;
  std::vector<ConfigNode> children;

  const std::string& label() const { return name.empty() ? kind : name; }
};

ConfigNode parse_config(const std::string& text, const std::string& filename);
ConfigNode parse_config_file(const std::string& path);
// Sweep support: overwrite (or add) a leaf value addressed by a dotted path
// of section labels, e.g. "nic.q1.t_abs_us". Throws ScenarioError on an
// unknown path.
void set_by_path(ConfigNode& root, const std::string& path,
                 const std::string& value);

struct QueueDecl {
  std::string name;
  int id = 0;
  int n_q = 1;
  SimDuration t_abs = 0;
  SimDuration t_pack = 0;
  int counter = 0;
  double r_max_pps = 0.0;
  double t_d_us = 0.0;  // process-specific max allowed delay, planner input
};

struct WorkerDecl {
  int priority = 0;
  SimDuration workload = 0;  // per-packet CPU demand of the receiver task
};

struct FlowDecl {
  std::string name;
  flows::Protocol proto = flows::Protocol::udp;
  std::uint16_t dst_port = 0;
  std::uint32_t src = 0;
  int priority = 0;
  SimDuration period = kMsec;  // t_P
  std::optional<std::uint64_t> server_capacity;
  SimDuration server_period = kMsec;
  std::string queue;  // NIC queue name (hardware/unified)
  std::optional<WorkerDecl> worker;
  SimTime bind_at = 0;
  SimTime unbind_at = -1;
};

struct MonitorDecl {
  std::string name;
  int priority = 0;
};

struct Scenario {
  std::string file;
  rxstack::PipelineMode mode = rxstack::PipelineMode::software;
  SimDuration duration = kSec;
  std::uint64_t seed = 1;
  rxstack::CostModel costs;

  int ring_capacity = 64;
  double recycle_threshold = 0.5;
  std::optional<flows::DefaultAction> unmatched;  // default depends on mode
  std::vector<QueueDecl> queues;

  int net_task_priority = 10;
  int priority_floor = 0;
  std::optional<rxstack::GateConfig> gate;
  SimDuration poll_period = 0;
  int poll_priority = 0;
  bool shortcircuit = true;
  bool cache_deferral = true;
  bool recycle_drop_head = false;

  std::vector<FlowDecl> flows;
  std::vector<MonitorDecl> monitors;
  std::vector<traffic::SourceSpec> sources;

  flows::DefaultAction unmatched_action() const;
  const QueueDecl* find_queue(const std::string& name) const;
  const FlowDecl* find_flow(const std::string& name) const;
};

Scenario build_scenario(const ConfigNode& root);
Scenario load_scenario(const std::string& path);

}  // namespace rtrx::harness
