#pragma once

#include <cstdint>
#include <vector>

#include "rtrx/flows/flow.hpp"
#include "rtrx/sim/time.hpp"

namespace rtrx::flows {

enum class Disposition : std::uint8_t {
  none,  // still in flight (or run ended first)
  delivered,
  dropped_unregistered,
  dropped_queue_full,
  dropped_mitigated,
  recycled,
  dropped_bd_starved,
};

const char* to_string(Disposition d);

// Pipeline stages a packet can be stamped with, in pipeline order.
enum class Stage : std::uint8_t {
  nic_rx = 0,
  irq,
  classified,
  dequeued,
  stack_done,
  delivered,
};
inline constexpr int kStageCount = 6;

// Execution path taken by the eager driver for this packet.
enum class IsrPath : std::uint8_t {
  none = 0,
  regular,
  shortcircuit,
  mitigated,
  regular_recycle,
  regular_prio_raise,
  regular_recycle_prio_raise,
};

const char* to_string(IsrPath p);

struct PacketRecord {
  std::uint32_t id = 0;
  std::uint16_t source_idx = 0;
  PacketHeader header;
  std::uint16_t payload_len = 0;
  std::int32_t flow_id = -1;   // set by classification
  std::int16_t queue_id = -1;  // NIC queue in hardware/unified modes
  Disposition disposition = Disposition::none;
  IsrPath path = IsrPath::none;
  SimTime stage[kStageCount] = {-1, -1, -1, -1, -1, -1};
  SimTime recycled_at = -1;       // when a buffered packet lost its buffer
  std::int32_t isr_cost_ns = -1;  // eager-driver duration charged for it

  bool has_stage(Stage s) const { return stage[static_cast<int>(s)] >= 0; }
  SimTime at(Stage s) const { return stage[static_cast<int>(s)]; }
  void set_stage(Stage s, SimTime t);
  // Disposition is set exactly once.
  void dispose(Disposition d);
};

using PacketStore = std::vector<PacketRecord>;

}  // namespace rtrx::flows
