#include "rtrx/traffic/source.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rtrx::traffic {

namespace {

// Smallest spacing two arrivals of the source can have, for validating the
// jitter bound.
SimDuration min_gap(const SourceSpec& s) {
  switch (s.pattern) {
    case Pattern::constant:
      return static_cast<SimDuration>(1e9 / s.rate_pps);
    case Pattern::burst:
      return s.burst_count > 1 ? s.burst_gap : s.burst_period;
    case Pattern::ramp: {
      double peak = std::max(s.rate_pps, s.rate_end_pps);
      return peak > 0 ? static_cast<SimDuration>(1e9 / peak) : 0;
    }
    case Pattern::replay:
      return 0;
  }
  return 0;
}

}  // namespace

void SourceSpec::validate() const {
  switch (pattern) {
    case Pattern::constant:
      if (rate_pps <= 0.0) throw std::invalid_argument("source " + name + ": rate must be > 0");
      break;
    case Pattern::ramp:
      if (rate_pps < 0.0 || rate_end_pps < 0.0 || (rate_pps <= 0.0 && rate_end_pps <= 0.0)) {
        throw std::invalid_argument("source " + name + ": ramp rates must be >= 0, one > 0");
      }
      break;
    case Pattern::burst:
      if (burst_count < 1) throw std::invalid_argument("source " + name + ": burst count must be >= 1");
      if (burst_period <= 0) throw std::invalid_argument("source " + name + ": burst period must be > 0");
      if (burst_gap < 0) throw std::invalid_argument("source " + name + ": burst gap must be >= 0");
      break;
    case Pattern::replay:
      if (file.empty()) throw std::invalid_argument("source " + name + ": replay needs a file");
      break;
  }
  if (jitter < 0) throw std::invalid_argument("source " + name + ": negative jitter");
  if (jitter > 0) {
    SimDuration gap = min_gap(*this);
    // 2 * jitter must fit into the smallest gap or arrivals could swap,
    // breaking per-source ordering.
    if (gap <= 0 || 2 * jitter >= gap) {
      throw std::invalid_argument("source " + name +
                                  ": jitter bound too large for the inter-arrival gap");
    }
  }
}

std::vector<Arrival> generate(const SourceSpec& spec, SimTime horizon,
                              std::uint64_t scenario_seed,
                              std::uint16_t source_idx) {
  spec.validate();
  SimTime stop = spec.stop >= 0 ? std::min(spec.stop, horizon) : horizon;
  std::vector<Arrival> out;
  auto push = [&](SimTime t) {
    if (t < spec.start || t >= stop) return;
    out.push_back(Arrival{t, source_idx, static_cast<std::uint32_t>(out.size()),
                          spec.header, spec.payload_len});
  };

  switch (spec.pattern) {
    case Pattern::constant: {
      long double period = 1e9L / static_cast<long double>(spec.rate_pps);
      for (std::int64_t k = 0;; ++k) {
        SimTime t = spec.start + static_cast<SimTime>(
                                     std::llroundl(static_cast<long double>(k) * period));
        if (t >= stop) break;
        push(t);
      }
      break;
    }
    case Pattern::burst: {
      for (SimTime ps = spec.start; ps < stop; ps += spec.burst_period) {
        for (int i = 0; i < spec.burst_count; ++i) {
          push(ps + static_cast<SimTime>(i) * spec.burst_gap);
        }
      }
      break;
    }
    case Pattern::ramp: {
      // rate(t) = r0 + (r1 - r0) * t / D over [start, stop); the k-th arrival
      // is where the integrated rate crosses k.
      long double r0 = spec.rate_pps;
      long double r1 = spec.rate_end_pps;
      long double dur_s = static_cast<long double>(stop - spec.start) / 1e9L;
      if (dur_s <= 0) break;
      long double slope = (r1 - r0) / dur_s;
      long double total = (r0 + r1) / 2.0L * dur_s;
      for (std::int64_t k = 0; k < static_cast<std::int64_t>(total); ++k) {
        long double t_s;
        if (std::fabsl(slope) < 1e-12L) {
          t_s = static_cast<long double>(k) / r0;
        } else {
          // solve r0 t + slope t^2 / 2 = k
          long double disc = r0 * r0 + 2.0L * slope * static_cast<long double>(k);
          if (disc < 0) break;
          t_s = (-r0 + std::sqrtl(disc)) / slope;
        }
        push(spec.start + static_cast<SimTime>(std::llroundl(t_s * 1e9L)));
      }
      break;
    }
    case Pattern::replay: {
      std::vector<TraceRow> rows = load_trace_file(spec.file);
      for (const TraceRow& r : rows) {
        flows::PacketHeader h;
        h.proto = r.proto;
        h.dst_port = r.dst_port;
        h.src = spec.header.src;
        SimTime t = spec.start + r.time_us * kUsec;
        if (t < spec.start || t >= stop) continue;
        out.push_back(Arrival{t, source_idx,
                              static_cast<std::uint32_t>(out.size()), h,
                              r.len});
      }
      break;
    }
  }

  if (spec.jitter > 0) {
    std::mt19937_64 rng(scenario_seed * 0x9e3779b97f4a7c15ULL + source_idx + 1);
    std::uniform_int_distribution<SimDuration> dist(-spec.jitter, spec.jitter);
    for (Arrival& a : out) {
      SimTime t = a.time + dist(rng);
      if (t < spec.start) t = spec.start;
      if (t >= stop) t = stop - 1;
      a.time = t;
    }
  }
  return out;
}

std::vector<Arrival> merge(std::vector<std::vector<Arrival>> streams) {
  std::vector<Arrival> all;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  all.reserve(total);
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());
  std::stable_sort(all.begin(), all.end(), [](const Arrival& a, const Arrival& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.source_idx != b.source_idx) return a.source_idx < b.source_idx;
    return a.seq < b.seq;
  });
  return all;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

[[noreturn]] void fail(const std::string& label, int line, const std::string& what) {
  throw std::runtime_error(label + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<TraceRow> load_trace(std::istream& in, const std::string& label) {
  std::string line;
  if (!std::getline(in, line)) fail(label, 1, "empty trace file");
  std::vector<std::string> header = split_csv_line(line);
  int col_time = -1, col_proto = -1, col_port = -1, col_len = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "time_us") col_time = i;
    else if (header[i] == "protocol") col_proto = i;
    else if (header[i] == "dst_port") col_port = i;
    else if (header[i] == "len") col_len = i;
  }
  if (col_time < 0) fail(label, 1, "missing column time_us");
  if (col_proto < 0) fail(label, 1, "missing column protocol");
  if (col_port < 0) fail(label, 1, "missing column dst_port");
  if (col_len < 0) fail(label, 1, "missing column len");

  std::vector<TraceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> cells = split_csv_line(line);
    int needed = std::max(std::max(col_time, col_proto), std::max(col_port, col_len));
    if (static_cast<int>(cells.size()) <= needed) fail(label, lineno, "too few columns");
    TraceRow row{};
    try {
      row.time_us = std::stoll(cells[col_time]);
      row.dst_port = static_cast<std::uint16_t>(std::stoul(cells[col_port]));
      row.len = static_cast<std::uint16_t>(std::stoul(cells[col_len]));
    } catch (const std::exception&) {
      fail(label, lineno, "malformed numeric field");
    }
    auto proto = flows::protocol_from_string(cells[col_proto]);
    if (!proto.has_value()) fail(label, lineno, "unknown protocol '" + cells[col_proto] + "'");
    row.proto = *proto;
    if (row.time_us < 0) fail(label, lineno, "negative timestamp");
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TraceRow& a, const TraceRow& b) { return a.time_us < b.time_us; });
  return rows;
}

std::vector<TraceRow> load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open trace file");
  return load_trace(in, path);
}

}  // namespace rtrx::traffic
