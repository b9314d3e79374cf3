#pragma once

#include <optional>
#include <vector>

#include "rtrx/flows/flow.hpp"

namespace rtrx::flows {

enum class DefaultAction : std::uint8_t { background_flow, drop };

// Lookup table from packet headers to bound flows. UDP and TCP flows match
// on (protocol, dst_port); ARP and ICMP each form a single flow matched on
// protocol alone. Classification is a pure function of (header, table).
class FlowTable {
 public:
  explicit FlowTable(DefaultAction unmatched = DefaultAction::background_flow)
      : unmatched_(unmatched) {}

  // Registers the flow; throws std::invalid_argument on a conflicting
  // (protocol, dst_port) binding or invalid period.
  int bind(FlowSpec spec);
  // Throws on unknown id.
  void unbind(int flow_id);

  std::optional<int> classify(const PacketHeader& header) const;

  const FlowSpec* find(int flow_id) const;
  const std::vector<FlowSpec>& flows() const { return flows_; }
  DefaultAction unmatched_action() const { return unmatched_; }
  void set_unmatched_action(DefaultAction a) { unmatched_ = a; }

 private:
  std::vector<FlowSpec> flows_;  // bound flows, in bind order
  DefaultAction unmatched_;
  int next_id_ = 0;
};

}  // namespace rtrx::flows
