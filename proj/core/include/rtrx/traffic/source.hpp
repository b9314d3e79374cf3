#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtrx/flows/flow.hpp"
#include "rtrx/sim/time.hpp"

namespace rtrx::traffic {

enum class Pattern : std::uint8_t { constant, burst, ramp, replay };

struct SourceSpec {
  std::string name;
  Pattern pattern = Pattern::constant;
  flows::PacketHeader header;
  std::uint16_t payload_len = 0;  // zero-length UDP by default
  SimTime start = 0;
  SimTime stop = -1;  // -1: run until the horizon
  // constant / ramp
  double rate_pps = 0.0;
  double rate_end_pps = 0.0;
  // burst
  int burst_count = 0;
  SimDuration burst_gap = 0;
  SimDuration burst_period = 0;
  // replay
  std::string file;
  // bounded uniform jitter, applied per arrival
  SimDuration jitter = 0;

  void validate() const;  // throws std::invalid_argument
};

struct Arrival {
  SimTime time;
  std::uint16_t source_idx;
  std::uint32_t seq;
  flows::PacketHeader header;
  std::uint16_t payload_len;
};

// Deterministic generation: the arrival list depends only on
// (spec, scenario_seed, source_idx, horizon), never on simulation state.
std::vector<Arrival> generate(const SourceSpec& spec, SimTime horizon,
                              std::uint64_t scenario_seed,
                              std::uint16_t source_idx);

// Stable merge of per-source streams by (time, source index, sequence).
std::vector<Arrival> merge(std::vector<std::vector<Arrival>> streams);

struct TraceRow {
  std::int64_t time_us;
  flows::Protocol proto;
  std::uint16_t dst_port;
  std::uint16_t len;
};

// Parses the trace CSV `time_us,protocol,dst_port,len` (header required).
// Non-monotone times are accepted and sorted stably. Parse failures throw
// std::runtime_error naming the line (and missing columns by name).
std::vector<TraceRow> load_trace(std::istream& in, const std::string& label);
std::vector<TraceRow> load_trace_file(const std::string& path);

}  // namespace rtrx::traffic
