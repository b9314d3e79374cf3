#include "rtrx/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace rtrx::harness {

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile: empty samples");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("percentile: q outside [0,1]");
  std::sort(samples.begin(), samples.end());
  if (q == 0.0) return samples.front();
  double n = static_cast<double>(samples.size());
  // Epsilon guards against 0.9 * 100 = 90.0000000000001-style float noise.
  std::size_t rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  if (rank < 1) rank = 1;
  if (rank > samples.size()) rank = samples.size();
  return samples[rank - 1];
}

std::vector<double> percentiles(const std::vector<double>& samples,
                                const std::vector<double>& qs) {
  std::vector<double> out;
  out.reserve(qs.size());
  for (double q : qs) out.push_back(percentile(samples, q));
  return out;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double RunResult::cost_per_processed_ns() const {
  if (processed == 0) return 0.0;
  return static_cast<double>(networking_cpu()) / static_cast<double>(processed);
}

SimDuration RunResult::polling_time() const {
  SimDuration total = 0;
  SimTime enter = -1;
  for (const auto& [t, mode] : mode_log) {
    if (mode == rxstack::StackMode::polling) {
      if (enter < 0) enter = t;
    } else if (enter >= 0) {
      total += t - enter;
      enter = -1;
    }
  }
  if (enter >= 0) total += duration - enter;
  return total;
}

std::map<int, FlowStats> flow_stats(const RunResult& result) {
  std::map<int, FlowStats> stats;
  auto name_of = [&](int flow_id) -> std::string {
    if (flow_id == rxstack::kBackgroundFlow) return "background";
    if (flow_id < 0) return "unmatched";
    auto it = result.flow_names.find(flow_id);
    if (it != result.flow_names.end()) return it->second;
    return "flow" + std::to_string(flow_id);
  };

  for (const flows::PacketRecord& p : result.packets) {
    int key = p.flow_id;
    FlowStats& fs = stats[key];
    if (fs.name.empty()) fs.name = name_of(key);
    fs.offered++;
    switch (p.disposition) {
      case flows::Disposition::delivered: fs.delivered++; break;
      case flows::Disposition::dropped_unregistered: fs.dropped_unregistered++; break;
      case flows::Disposition::dropped_queue_full: fs.dropped_queue_full++; break;
      case flows::Disposition::dropped_mitigated: fs.dropped_mitigated++; break;
      case flows::Disposition::recycled: fs.recycled++; break;
      case flows::Disposition::dropped_bd_starved: fs.dropped_bd_starved++; break;
      case flows::Disposition::none: fs.pending++; break;
    }
    if (p.disposition == flows::Disposition::delivered) {
      SimTime rx = p.at(flows::Stage::nic_rx);
      SimTime done = p.at(flows::Stage::delivered);
      fs.latency_us.push_back(to_us(done - rx));
      if (p.has_stage(flows::Stage::irq)) {
        SimTime irq = p.at(flows::Stage::irq);
        fs.coalescing_us.push_back(to_us(irq - rx));
        fs.os_delay_us.push_back(to_us(done - irq));
      }
    }
  }
  for (auto& [id, fs] : stats) {
    fs.liveness = fs.offered == 0
                      ? 0.0
                      : static_cast<double>(fs.delivered) / static_cast<double>(fs.offered);
  }
  return stats;
}

std::vector<std::pair<std::string, std::string>> metric_rows(const RunResult& r) {
  std::vector<std::pair<std::string, std::string>> rows;
  auto add = [&](const std::string& k, const std::string& v) {
    rows.emplace_back(k, v);
  };
  auto add_u = [&](const std::string& k, std::uint64_t v) {
    add(k, std::to_string(v));
  };
  auto add_i = [&](const std::string& k, std::int64_t v) {
    add(k, std::to_string(v));
  };
  auto add_f = [&](const std::string& k, double v, int digits = 6) {
    add(k, format_fixed(v, digits));
  };

  add("run.pipeline", to_string(r.scenario.mode));
  add_i("run.duration_ns", r.duration);
  add_u("run.seed", r.scenario.seed);

  std::uint64_t offered = r.packets.size();
  std::uint64_t delivered = 0, unreg = 0, qfull = 0, mitigated = 0, recycled = 0,
                starved = 0, pending = 0;
  for (const flows::PacketRecord& p : r.packets) {
    switch (p.disposition) {
      case flows::Disposition::delivered: delivered++; break;
      case flows::Disposition::dropped_unregistered: unreg++; break;
      case flows::Disposition::dropped_queue_full: qfull++; break;
      case flows::Disposition::dropped_mitigated: mitigated++; break;
      case flows::Disposition::recycled: recycled++; break;
      case flows::Disposition::dropped_bd_starved: starved++; break;
      case flows::Disposition::none: pending++; break;
    }
  }
  add_u("packets.offered", offered);
  add_u("packets.delivered", delivered);
  add_u("packets.dropped_unregistered", unreg);
  add_u("packets.dropped_queue_full", qfull);
  add_u("packets.dropped_mitigated", mitigated);
  add_u("packets.recycled", recycled);
  add_u("packets.dropped_bd_starved", starved);
  add_u("packets.pending", pending);
  add_u("packets.processed", r.processed);

  add_u("irq.count", r.irq_total);
  add_f("irq.per_offered",
        offered == 0 ? 0.0
                     : static_cast<double>(r.irq_total) / static_cast<double>(offered));
  for (const auto& [queue, count] : r.irq_per_queue) {
    add_u("irq.queue." + std::to_string(queue), count);
  }
  for (const auto& [queue, count] : r.packets_per_queue) {
    add_u("packets.queue." + std::to_string(queue), count);
  }

  SimDuration busy = r.irq_time;
  for (const TaskStat& t : r.tasks) busy += t.cpu;
  double dur = static_cast<double>(r.duration);
  add_i("cpu.busy_ns", busy);
  add_i("cpu.irq_ns", r.irq_time);
  add_f("cpu.util", busy / dur);
  add_f("cpu.util_irq", static_cast<double>(r.irq_time) / dur);
  add_f("cpu.util_networking", static_cast<double>(r.networking_cpu()) / dur);
  for (const TaskStat& t : r.tasks) {
    add_i("task." + t.name + ".cpu_ns", t.cpu);
    add_f("task." + t.name + ".util", static_cast<double>(t.cpu) / dur);
    add_i("task." + t.name + ".interference_ns", t.interference);
    add_u("task." + t.name + ".packets", t.packets);
  }
  add_f("net.cost_per_packet_us", r.cost_per_processed_ns() / 1e3);

  std::uint64_t switches = r.mode_log.empty() ? 0 : r.mode_log.size() - 1;
  add_u("mode.switches", switches);
  add_i("mode.polling_ns", r.polling_time());
  add("mode.final", r.mode_log.empty() || r.mode_log.back().second ==
                                              rxstack::StackMode::isr_driven
                        ? "isr-driven"
                        : "polling");

  auto stats = flow_stats(r);
  for (const auto& [id, fs] : stats) {
    if (id < 0) continue;
    add_f("flow." + fs.name + ".liveness", fs.liveness);
  }
  return rows;
}

void write_metrics_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "key,value\n";
  for (const auto& [k, v] : metric_rows(r)) out << k << ',' << v << '\n';
}

void write_flows_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "flow,offered,delivered,dropped_unregistered,dropped_queue_full,"
         "dropped_mitigated,recycled,dropped_bd_starved,pending,liveness,"
         "lat_p0_us,lat_p90_us,lat_p99_us,lat_p999_us,lat_p9999_us,"
         "coal_median_us,os_median_us\n";
  for (const auto& [id, fs] : flow_stats(r)) {
    out << fs.name << ',' << fs.offered << ',' << fs.delivered << ','
        << fs.dropped_unregistered << ',' << fs.dropped_queue_full << ','
        << fs.dropped_mitigated << ',' << fs.recycled << ','
        << fs.dropped_bd_starved << ',' << fs.pending << ','
        << format_fixed(fs.liveness, 6);
    if (!fs.latency_us.empty()) {
      for (double q : kLatencyQuantiles) {
        out << ',' << format_fixed(percentile(fs.latency_us, q), 3);
      }
    } else {
      out << ",,,,,";
    }
    if (!fs.coalescing_us.empty()) {
      out << ',' << format_fixed(percentile(fs.coalescing_us, 0.5), 3) << ','
          << format_fixed(percentile(fs.os_delay_us, 0.5), 3);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_trace_csv(const RunResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  r.trace.write_csv(out);
}

}  // namespace rtrx::harness
