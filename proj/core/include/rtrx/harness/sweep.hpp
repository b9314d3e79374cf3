#pragma once

#include <string>
#include <vector>

#include "rtrx/harness/runner.hpp"
#include "rtrx/harness/scenario.hpp"

namespace rtrx::harness {

struct AxisSpec {
  std::string path;                 // dotted path into the scenario tree
  std::vector<std::string> values;  // applied verbatim
};

// Parses "path=v1,v2,v3". Throws ScenarioError on malformed input.
AxisSpec parse_axis(const std::string& arg);

struct SweepResult {
  std::vector<std::string> paths;
  std::vector<std::vector<std::string>> grid;  // one value tuple per run
  std::vector<RunResult> runs;                 // grid order
};

// Runs the cartesian product of the axes over the base scenario tree. Runs
// are independent and execute concurrently; results are ordered by grid
// index regardless of completion order. An empty axis list is a single run.
SweepResult run_sweep(const ConfigNode& base, const std::vector<AxisSpec>& axes,
                      const RunOptions& opts = {.record_trace = false});

// Grid CSV: axis columns prepended to the per-run metric columns.
void write_sweep_csv(const SweepResult& result, const std::string& path);

}  // namespace rtrx::harness
