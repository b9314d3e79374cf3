#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "rtrx/flows/flow.hpp"
#include "rtrx/sim/engine.hpp"
#include "rtrx/sim/time.hpp"

namespace rtrx::nic {

// On-NIC register memory for m moderated table entries plus the reserved
// non-transport queue: m * 30 B + 14 B.
std::uint64_t nic_memory_bytes(std::uint64_t queue_count);

// Moderation parameters of one receive queue. A value of 0 disables the
// respective mechanism. With both timers enabled, t_pack <= t_abs.
struct QueueConfig {
  int queue_id = 0;
  int n_q = 1;                  // capacity in packets
  SimDuration t_abs = 0;        // absolute timer
  SimDuration t_pack = 0;       // packet timer
  int counter_threshold = 0;    // packet counter
  double r_max_pps = 0.0;       // informational, consumed by the planner

  void validate() const;
};

enum class MqRxResult : std::uint8_t {
  enqueued,
  dropped_unregistered,
  dropped_queue_full,
};

// Multiqueue interrupt-moderating NIC. Packets are steered by the
// distribution map (dst port / protocol -> queue); a miss is dropped before
// any interrupt. Each queue coalesces packets under its counter, packet
// timer and absolute timer and hands the whole pending batch to on_batch in
// one interrupt. Timer expiry ties with a simultaneous arrival resolve in
// favor of the timer, so an absolute window [t0, t0 + t_abs) is half-open.
class MqNic {
 public:
  using BatchFn = std::function<void(int queue_id, const std::vector<std::uint32_t>&)>;

  MqNic(sim::Engine& engine, BatchFn on_batch)
      : engine_(engine), on_batch_(std::move(on_batch)) {}

  // Throws on invalid config. Reconfiguring mid-run applies to windows
  // opened afterwards; the current pending window keeps its deadlines.
  void configure(const QueueConfig& cfg);
  bool has_queue(int queue_id) const { return queues_.count(queue_id) != 0; }
  const QueueConfig& config(int queue_id) const;

  void map_port(flows::Protocol proto, std::uint16_t dst_port, int queue_id);
  void map_protocol(flows::Protocol proto, int queue_id);
  void unmap_port(flows::Protocol proto, std::uint16_t dst_port);
  // Flushes the pending batch with a final interrupt, then removes the
  // queue and any map entries pointing at it.
  void release_queue(int queue_id);

  // queue_out (optional) receives the queue the packet was steered to.
  MqRxResult rx(std::uint32_t packet_id, const flows::PacketHeader& header,
                int* queue_out = nullptr);

  std::uint64_t fires(int queue_id) const;
  std::uint64_t packets(int queue_id) const;
  int pending(int queue_id) const;
  std::vector<int> queue_ids() const;

 private:
  struct Queue {
    QueueConfig cfg;
    std::vector<std::uint32_t> pending;
    std::uint64_t window_gen = 0;  // invalidates armed timers on fire
    std::uint64_t pack_gen = 0;    // invalidates superseded packet timers
    std::uint64_t fire_count = 0;
    std::uint64_t packet_count = 0;
  };

  Queue& queue_at(int id);
  void fire(int queue_id);
  void arm_absolute(int queue_id);
  void arm_packet(int queue_id);

  sim::Engine& engine_;
  BatchFn on_batch_;
  std::map<int, Queue> queues_;
  // (proto, port) -> queue for UDP/TCP; port 0 rows match on protocol alone.
  std::map<std::pair<flows::Protocol, std::uint16_t>, int> port_map_;
  std::map<flows::Protocol, int> proto_map_;
};

}  // namespace rtrx::nic
