#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rtrx/flows/packet.hpp"
#include "rtrx/harness/scenario.hpp"
#include "rtrx/rxstack/rxstack.hpp"
#include "rtrx/sim/engine.hpp"
#include "rtrx/sim/trace.hpp"

namespace rtrx::harness {

// Nearest-rank percentile: the value at index ceil(q * n) (1-based) of the
// sorted samples; q = 0 returns the minimum. Throws on empty samples.
double percentile(std::vector<double> samples, double q);
std::vector<double> percentiles(const std::vector<double>& samples,
                                const std::vector<double>& qs);

inline const std::vector<double> kLatencyQuantiles{0.0, 0.90, 0.99, 0.999, 0.9999};

struct TaskStat {
  std::string name;
  sim::TaskKind kind;
  SimDuration cpu = 0;
  std::uint64_t packets = 0;        // delivered to this task (workers)
  SimDuration interference = 0;     // sum of (span - work) over finished jobs
};

struct RunResult {
  Scenario scenario;
  SimDuration duration = 0;
  sim::SimTrace trace;
  flows::PacketStore packets;
  std::vector<TaskStat> tasks;
  SimDuration irq_time = 0;
  std::uint64_t irq_total = 0;
  std::map<int, std::uint64_t> irq_per_queue;
  std::map<int, std::uint64_t> packets_per_queue;
  // (time, queue, batch size) for every NIC queue fire, in fire order.
  std::vector<std::tuple<SimTime, int, int>> fire_events;
  std::vector<std::pair<SimTime, rxstack::StackMode>> mode_log;
  std::vector<std::pair<SimTime, int>> prio_log;
  std::map<int, std::string> flow_names;  // flow id -> scenario flow name
  std::uint64_t processed = 0;
  SimDuration net_cpu = 0;
  SimDuration poll_cpu = 0;
  SimDuration monitor_cpu = 0;
  SimDuration worker_cpu = 0;

  SimDuration networking_cpu() const { return irq_time + net_cpu + poll_cpu; }
  // Passive per-packet CPU cost: networking time over driver-retrieved
  // packets, in nanoseconds. 0 when nothing was processed.
  double cost_per_processed_ns() const;
  SimDuration polling_time() const;
};

struct FlowStats {
  std::string name;
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_unregistered = 0;
  std::uint64_t dropped_queue_full = 0;
  std::uint64_t dropped_mitigated = 0;
  std::uint64_t recycled = 0;
  std::uint64_t dropped_bd_starved = 0;
  std::uint64_t pending = 0;
  double liveness = 0.0;
  std::vector<double> latency_us;      // delivered - nic_rx
  std::vector<double> coalescing_us;   // irq - nic_rx
  std::vector<double> os_delay_us;     // delivered - irq

  std::uint64_t drops() const {
    return dropped_unregistered + dropped_queue_full + dropped_mitigated +
           recycled + dropped_bd_starved;
  }
};

// Aggregates per flow; key -1 holds never-classified packets and key
// rxstack::kBackgroundFlow the background flow.
std::map<int, FlowStats> flow_stats(const RunResult& result);

// Deterministic key/value rendering of a run, used by metrics.csv and the
// sweep grid.
std::vector<std::pair<std::string, std::string>> metric_rows(const RunResult& r);

void write_metrics_csv(const RunResult& r, const std::string& path);
void write_flows_csv(const RunResult& r, const std::string& path);
void write_trace_csv(const RunResult& r, const std::string& path);

std::string format_fixed(double v, int digits = 3);

}  // namespace rtrx::harness
