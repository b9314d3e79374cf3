#include "rtrx/harness/sweep.hpp"

#include <atomic>
#include <fstream>
#include <thread>

namespace rtrx::harness {

AxisSpec parse_axis(const std::string& arg) {
  auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ScenarioError("axis", 0, "expected path=v1,v2,... got '" + arg + "'");
  }
  AxisSpec spec;
  spec.path = arg.substr(0, eq);
  std::string rest = arg.substr(eq + 1);
  std::string cur;
  for (char c : rest) {
    if (c == ',') {
      spec.values.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  spec.values.push_back(cur);
  if (spec.values.empty() || spec.values.front().empty()) {
    throw ScenarioError("axis", 0, "axis '" + spec.path + "' has no values");
  }
  return spec;
}

SweepResult run_sweep(const ConfigNode& base, const std::vector<AxisSpec>& axes,
                      const RunOptions& opts) {
  SweepResult result;
  for (const AxisSpec& a : axes) result.paths.push_back(a.path);

  // Cartesian product, first axis slowest.
  std::vector<std::vector<std::string>> grid;
  grid.emplace_back();
  for (const AxisSpec& a : axes) {
    std::vector<std::vector<std::string>> next;
    for (const auto& row : grid) {
      for (const std::string& v : a.values) {
        auto extended = row;
        extended.push_back(v);
        next.push_back(std::move(extended));
      }
    }
    grid = std::move(next);
  }
  result.grid = grid;

  // Validate every grid point up front so path errors surface before any run.
  std::vector<Scenario> scenarios;
  scenarios.reserve(grid.size());
  for (const auto& row : grid) {
    ConfigNode tree = base;
    for (std::size_t i = 0; i < row.size(); ++i) {
      set_by_path(tree, axes[i].path, row[i]);
    }
    scenarios.push_back(build_scenario(tree));
  }

  result.runs.resize(scenarios.size());
  unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(scenarios.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      result.runs[i] = run_scenario(scenarios[i], opts);
    }
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= scenarios.size()) return;
        result.runs[i] = run_scenario(scenarios[i], opts);
      }
    });
  }
  for (auto& t : pool) t.join();
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (result.runs.empty()) return;
  auto first = metric_rows(result.runs.front());
  for (const std::string& p : result.paths) out << p << ',';
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << first[i].first << (i + 1 < first.size() ? "," : "\n");
  }
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    for (const std::string& v : result.grid[r]) out << v << ',';
    auto rows = metric_rows(result.runs[r]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << rows[i].second << (i + 1 < rows.size() ? "," : "\n");
    }
  }
}

}  // namespace rtrx::harness
