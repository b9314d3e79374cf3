#pragma once

#include <string>
#include <vector>

namespace rtrx::harness {

// The six built-in experiments. Scenario content lives in the scenario
// files under scenario_dir; presets only add the sweeps and the
// experiment-specific output tables.
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);

// Runs the preset and writes its outputs under out_dir/<preset>/. Throws on
// unknown preset or scenario problems.
void run_preset(const std::string& name, const std::string& scenario_dir,
                const std::string& out_dir, bool with_trace);

}  // namespace rtrx::harness
