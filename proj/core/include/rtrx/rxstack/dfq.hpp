#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>

namespace rtrx::rxstack {

struct DfqEntry {
  std::uint32_t packet_id;
  int flow_id;
  int priority;
};

// Differentiated flow queues: one FIFO per flow, indexed by flow priority
// for O(log) access to both the highest- and the lowest-priority buffered
// packet. A packet lives in at most one flow queue.
class Dfq {
 public:
  void insert(std::uint32_t packet_id, int flow_id, int priority);

  // Head of the highest-priority nonempty flow FIFO (FIFO within flow).
  DfqEntry pop_highest();
  // Victim from the lowest-priority nonempty flow FIFO: its tail by default
  // (drop-tail), or its head with drop_head.
  DfqEntry recycle_lowest(bool drop_head = false);

  std::optional<int> highest_priority() const;
  std::optional<int> lowest_priority() const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::size_t flow_depth(int flow_id, int priority) const;

 private:
  // priority -> flow_id -> FIFO of packet ids
  std::map<int, std::map<int, std::deque<std::uint32_t>>> by_prio_;
  std::size_t size_ = 0;
};

}  // namespace rtrx::rxstack
