#include "rtrx/harness/presets.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rtrx/harness/metrics.hpp"
#include "rtrx/harness/runner.hpp"
#include "rtrx/harness/sweep.hpp"

namespace rtrx::harness {

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kPresets = {
    "sw-exp1", "sw-exp2", "sw-exp3", "hw-exp1", "hw-exp2", "hw-exp3",
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::string scn(const std::string& dir, const std::string& file) {
  return dir + "/" + file;
}

// Per-packet CPU cost at a set of offered rates, for each stack
// configuration. The cost emerges from the passive measurement: networking
// CPU time over driver-retrieved packets.
void preset_sw_exp1(const std::string& dir, const std::string& out,
                    bool with_trace) {
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"original", "sw-exp1-original.scn"},
      {"modified-lp", "sw-exp1-lp.scn"},
      {"modified-lp-noshort", "sw-exp1-lp-noshort.scn"},
      {"modified-lp-eager", "sw-exp1-lp-eager.scn"},
      {"modified-hp", "sw-exp1-hp.scn"},
  };
  const std::vector<std::string> rates = {"100", "1000", "10000", "100000",
                                          "1000000"};
  auto csv = open_out(out + "/cpu_cost.csv");
  csv << "config,rate_pps,cost_per_packet_us,processed,offered,delivered\n";
  for (const auto& [name, file] : configs) {
    ConfigNode base = parse_config_file(scn(dir, file));
    SweepResult sweep =
        run_sweep(base, {AxisSpec{"load.rate_pps", rates}},
                  RunOptions{.record_trace = with_trace});
    write_sweep_csv(sweep, out + "/" + name + "-grid.csv");
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
      const RunResult& r = sweep.runs[i];
      std::uint64_t delivered = 0;
      for (const auto& p : r.packets) {
        if (p.disposition == flows::Disposition::delivered) delivered++;
      }
      csv << name << ',' << sweep.grid[i][0] << ','
          << format_fixed(r.cost_per_processed_ns() / 1e3, 4) << ','
          << r.processed << ',' << r.packets.size() << ',' << delivered << '\n';
    }
    if (with_trace) {
      for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
        write_trace_csv(sweep.runs[i],
                        out + "/" + name + "-r" + sweep.grid[i][0] + "-trace.csv");
      }
    }
  }
}

// Eager-driver duration distribution per execution path under a two-phase
// flood (low priority, then high priority).
void preset_sw_exp2(const std::string& dir, const std::string& out,
                    bool with_trace) {
  Scenario sc = load_scenario(scn(dir, "sw-exp2.scn"));
  RunResult r = run_scenario(sc, RunOptions{.record_trace = true});
  write_run_outputs(r, out, with_trace);

  std::map<flows::IsrPath, std::vector<double>> by_path;
  for (const auto& p : r.packets) {
    if (p.path == flows::IsrPath::none || p.isr_cost_ns < 0) continue;
    by_path[p.path].push_back(static_cast<double>(p.isr_cost_ns) / 1e3);
  }
  auto csv = open_out(out + "/isr_paths.csv");
  csv << "path,count,p0_us,p90_us,p99_us,p999_us,p9999_us\n";
  for (const auto& [path, samples] : by_path) {
    csv << to_string(path) << ',' << samples.size();
    for (double q : kLatencyQuantiles) {
      csv << ',' << format_fixed(percentile(samples, q), 3);
    }
    csv << '\n';
  }
}

// CPU utilization and HP-flow liveness over a grid of HP x LP flood rates,
// for the modified stack and the rate-limited original stack.
void preset_sw_exp3(const std::string& dir, const std::string& out,
                    bool with_trace) {
  struct Cfg {
    std::string name;
    std::string file;
    std::vector<std::string> hp_rates;
    std::vector<std::string> lp_rates;
  };
  const std::vector<Cfg> configs = {
      {"modified",
       "sw-exp3-software.scn",
       {"100", "300", "1000", "3000", "10000"},
       {"100", "1000", "3000", "7000", "20000"}},
      {"baseline-mitigated",
       "sw-exp3-baseline.scn",
       {"100", "300", "500", "1000", "2000"},
       {"100", "300", "500", "1000", "2000"}},
  };
  auto csv = open_out(out + "/mitigation_map.csv");
  csv << "config,hp_rate_pps,lp_rate_pps,cpu_util,hp_liveness,"
         "polling_fraction,mode_final\n";
  for (const Cfg& cfg : configs) {
    ConfigNode base = parse_config_file(scn(dir, cfg.file));
    SweepResult sweep = run_sweep(base,
                                  {AxisSpec{"hp_load.rate_pps", cfg.hp_rates},
                                   AxisSpec{"lp_load.rate_pps", cfg.lp_rates}},
                                  RunOptions{.record_trace = with_trace});
    write_sweep_csv(sweep, out + "/" + cfg.name + "-grid.csv");
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
      const RunResult& r = sweep.runs[i];
      SimDuration busy = r.irq_time;
      for (const TaskStat& t : r.tasks) {
        if (t.kind != sim::TaskKind::background_load_monitor) busy += t.cpu;
      }
      auto stats = flow_stats(r);
      double hp_liveness = 0.0;
      for (const auto& [id, fsr] : stats) {
        if (fsr.name == "hp") hp_liveness = fsr.liveness;
      }
      csv << cfg.name << ',' << sweep.grid[i][0] << ',' << sweep.grid[i][1]
          << ',' << format_fixed(static_cast<double>(busy) / r.duration, 6)
          << ',' << format_fixed(hp_liveness, 6) << ','
          << format_fixed(static_cast<double>(r.polling_time()) / r.duration, 6)
          << ','
          << (r.mode_log.back().second == rxstack::StackMode::polling
                  ? "polling"
                  : "isr-driven")
          << '\n';
    }
  }
}

// Packets and caused interrupts over time, binned.
void preset_hw_exp1(const std::string& dir, const std::string& out,
                    bool with_trace) {
  Scenario sc = load_scenario(scn(dir, "hw-exp1.scn"));
  RunResult r = run_scenario(sc, RunOptions{.record_trace = with_trace});
  write_run_outputs(r, out, with_trace);

  const SimDuration bin = 5 * kSec;
  int bins = static_cast<int>(ceil_div(r.duration, bin));
  std::map<int, std::vector<std::uint64_t>> pkt_bins, irq_bins;
  for (const auto& [q, n] : r.packets_per_queue) {
    pkt_bins[q].assign(bins, 0);
    irq_bins[q].assign(bins, 0);
  }
  for (const auto& p : r.packets) {
    if (p.queue_id < 0) continue;
    int b = static_cast<int>(p.at(flows::Stage::nic_rx) / bin);
    if (b >= 0 && b < bins) pkt_bins[p.queue_id][b]++;
  }
  for (const auto& [t, q, n] : r.fire_events) {
    int b = static_cast<int>(t / bin);
    if (b >= 0 && b < bins) irq_bins[q][b]++;
  }
  auto csv = open_out(out + "/histogram.csv");
  csv << "bin_start_s,queue,packets,interrupts\n";
  for (int b = 0; b < bins; ++b) {
    for (const auto& [q, v] : pkt_bins) {
      csv << (b * 5) << ',' << q << ',' << v[b] << ',' << irq_bins[q][b] << '\n';
    }
  }
}

// Interference on the critical process under an unexpected flood, for
// several absolute-timer settings of the flood queue.
void preset_hw_exp2(const std::string& dir, const std::string& out,
                    bool with_trace) {
  ConfigNode base = parse_config_file(scn(dir, "hw-exp2.scn"));
  SweepResult sweep = run_sweep(
      base,
      {AxisSpec{"nic.floodq.t_abs_us", {"0", "800", "1600", "2400", "3200"}},
       AxisSpec{"flood.rate_pps",
                {"1", "2500", "5000", "7500", "10000", "12500", "15000"}}},
      RunOptions{.record_trace = with_trace});
  write_sweep_csv(sweep, out + "/grid.csv");
  auto csv = open_out(out + "/flood_runtime.csv");
  csv << "flood_t_abs_us,flood_rate_pps,critical_interference_us,"
         "irq_count,irq_per_offered\n";
  for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
    const RunResult& r = sweep.runs[i];
    SimDuration critical = 0;
    for (const TaskStat& t : r.tasks) {
      if (t.name == "worker-critical") critical = t.interference;
    }
    csv << sweep.grid[i][0] << ',' << sweep.grid[i][1] << ','
        << format_fixed(to_us(critical), 3) << ',' << r.irq_total << ','
        << format_fixed(static_cast<double>(r.irq_total) /
                            std::max<std::size_t>(1, r.packets.size()),
                        6)
        << '\n';
  }
}

// Median delay decomposition per queue under expected load for the three
// moderation configurations.
void preset_hw_exp3(const std::string& dir, const std::string& out,
                    bool with_trace) {
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"none", "hw-exp3-none.scn"},
      {"medium", "hw-exp3-medium.scn"},
      {"strict", "hw-exp3-strict.scn"},
  };
  auto csv = open_out(out + "/delay.csv");
  csv << "config,flow,median_total_us,median_coal_us,median_os_us\n";
  for (const auto& [name, file] : configs) {
    Scenario sc = load_scenario(scn(dir, file));
    RunResult r = run_scenario(sc, RunOptions{.record_trace = with_trace});
    write_run_outputs(r, out + "/" + name, with_trace);
    for (const auto& [id, fsr] : flow_stats(r)) {
      if (id < 0 || fsr.latency_us.empty()) continue;
      csv << name << ',' << fsr.name << ','
          << format_fixed(percentile(fsr.latency_us, 0.5), 3) << ','
          << format_fixed(fsr.coalescing_us.empty()
                              ? 0.0
                              : percentile(fsr.coalescing_us, 0.5),
                          3)
          << ','
          << format_fixed(
                 fsr.os_delay_us.empty() ? 0.0 : percentile(fsr.os_delay_us, 0.5),
                 3)
          << '\n';
    }
  }
}

}  // namespace

std::vector<std::string> preset_names() { return kPresets; }

bool is_preset(const std::string& name) {
  return std::find(kPresets.begin(), kPresets.end(), name) != kPresets.end();
}

void run_preset(const std::string& name, const std::string& scenario_dir,
                const std::string& out_dir, bool with_trace) {
  if (!is_preset(name)) throw std::invalid_argument("unknown preset '" + name + "'");
  std::string out = out_dir + "/" + name;
  fs::create_directories(out);
  if (name == "sw-exp1") preset_sw_exp1(scenario_dir, out, with_trace);
  else if (name == "sw-exp2") preset_sw_exp2(scenario_dir, out, with_trace);
  else if (name == "sw-exp3") preset_sw_exp3(scenario_dir, out, with_trace);
  else if (name == "hw-exp1") preset_hw_exp1(scenario_dir, out, with_trace);
  else if (name == "hw-exp2") preset_hw_exp2(scenario_dir, out, with_trace);
  else if (name == "hw-exp3") preset_hw_exp3(scenario_dir, out, with_trace);
}

}  // namespace rtrx::harness
