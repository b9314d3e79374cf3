#pragma once

#include <string>

#include "rtrx/harness/metrics.hpp"
#include "rtrx/harness/scenario.hpp"
#include "rtrx/planner/planner.hpp"

namespace rtrx::harness {

struct RunOptions {
  bool record_trace = true;
};

// Assembles the pipeline described by the scenario (NIC variant, receive
// stack, flows, workers, monitor, traffic), runs it to the configured
// horizon and returns the collected results. Deterministic: identical
// scenarios and seeds produce identical results byte for byte.
RunResult run_scenario(const Scenario& scenario, const RunOptions& opts = {});

// Writes metrics.csv and flows.csv (plus trace.csv when requested) into
// out_dir, creating it if needed.
void write_run_outputs(const RunResult& result, const std::string& out_dir,
                       bool with_trace);

// Evaluates the closed-form queue parametrization against the scenario's
// configured queues. t_P per queue comes from the flow mapped to it.
planner::PlanReport plan_scenario(const Scenario& scenario);

}  // namespace rtrx::harness
