#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "rtrx/flows/flow_table.hpp"
#include "rtrx/flows/packet.hpp"
#include "rtrx/nic/bd_ring.hpp"
#include "rtrx/rxstack/cost_model.hpp"
#include "rtrx/rxstack/dfq.hpp"
#include "rtrx/rxstack/server.hpp"
#include "rtrx/sim/engine.hpp"

namespace rtrx::rxstack {

enum class PipelineMode : std::uint8_t {
  baseline,
  baseline_mitigated,
  software,
  hardware,
  unified,
};

const char* to_string(PipelineMode m);
std::optional<PipelineMode> pipeline_mode_from_string(const std::string& s);

enum class StackMode : std::uint8_t { isr_driven, polling };

// Pseudo flow id for unmatched packets carried as the background flow.
inline constexpr int kBackgroundFlow = -2;

struct GateConfig {
  std::uint64_t capacity = 0;  // packets per period
  SimDuration period = kMsec;
};

// The OS-side receive machinery in both variants:
//  - original stack: frame queue + fixed-priority network task, the whole
//    driver runs eagerly in the ISR;
//  - modified stack: eager/deferred driver split, differentiated flow
//    queues, per-flow deferrable servers, buffer recycling and a
//    priority-inheriting network task.
// A global deferrable server gates ISR execution and falls back to a
// polling driver task while exhausted.
class RxStack {
 public:
  struct Config {
    PipelineMode mode = PipelineMode::software;
    CostModel costs;
    int net_task_priority = 10;  // original stack (fixed priority)
    int priority_floor = 0;      // modified stack idle priority
    std::optional<GateConfig> gate;
    SimDuration poll_period = 0;  // 0 = global server period
    int poll_priority = 0;
    double recycle_threshold = 0.5;
    bool recycle_drop_head = false;
    bool shortcircuit_enabled = true;
    bool cache_deferral = true;
  };

  // Called at the delivery point with the packet and its flow (or
  // kBackgroundFlow); stamps delivered/dropped and wakes the worker.
  using DeliverFn = std::function<void(std::uint32_t, int)>;

  RxStack(sim::Engine& engine, nic::BdRing& ring, flows::FlowTable& table,
          flows::PacketStore& packets, Config cfg, DeliverFn deliver);

  // -- NIC-facing entry points --------------------------------------------
  // baseline / baseline-mitigated / software: one DMA'd packet.
  void packet_arrival(std::uint32_t packet_id);
  // hardware: a coalesced batch announced by queue `queue_id`.
  void hw_batch(int queue_id, const std::vector<std::uint32_t>& batch);
  // unified: classified descriptors written back to the shared BD ring.
  void unified_batch(int queue_id, const std::vector<std::uint32_t>& batch);

  // -- flow policy ----------------------------------------------------------
  void on_flow_bound(const flows::FlowSpec& spec);
  void on_flow_unbound(int flow_id);

  // -- introspection ---------------------------------------------------------
  StackMode mode() const { return mode_; }
  sim::TaskId net_task() const { return net_task_; }
  sim::TaskId poll_task() const { return poll_task_; }
  int net_task_current_priority() const;
  // Target priority per the inheritance rule: max over flows with packets
  // waiting or executing; floor when both sets are empty.
  int nettask_target_priority() const;
  std::uint64_t processed_count() const { return processed_; }
  const std::vector<std::pair<SimTime, StackMode>>& mode_log() const {
    return mode_log_;
  }
  const std::vector<std::pair<SimTime, int>>& priority_log() const {
    return priority_log_;
  }
  std::size_t dfq_depth() const { return dfq_.size(); }
  std::uint64_t admissions(int flow_id) const;

 private:
  sim::VectorId vector_for_queue(int queue_id);
  SimDuration isr_rx_single();
  SimDuration isr_hw_queue(int queue_id);
  SimDuration isr_unified();
  // One packet through the eager driver (software/unified) in ISR or poll
  // context. Returns the charged duration. With deferred_raise set the
  // priority comparison is accumulated there instead of applied per packet.
  SimDuration process_modified(std::uint32_t packet_id, bool via_isr,
                               int* deferred_raise);
  SimDuration process_modified_inner(std::uint32_t packet_id, bool via_isr,
                                     int* deferred_raise);
  SimDuration process_original(std::uint32_t packet_id);
  void set_net_priority(int prio);
  std::optional<sim::Job> net_source();
  std::optional<sim::Job> poll_source();
  void finish_packet(std::uint32_t packet_id, int flow_id, int flow_priority);
  void enter_polling();
  void exit_polling();
  void on_gate_boundary();
  void on_poll_tick();
  void retrieve_for_polling(std::uint64_t count);
  DeferrableServer* flow_server(int flow_id);
  int flow_priority(int flow_id) const;

  sim::Engine& engine_;
  nic::BdRing& ring_;
  flows::FlowTable& table_;
  flows::PacketStore& packets_;
  Config cfg_;
  DeliverFn deliver_;
  bool modified_stack_;

  sim::TaskId net_task_ = sim::kNoTask;
  sim::TaskId poll_task_ = sim::kNoTask;
  sim::VectorId rx_vector_ = 0;
  std::map<int, sim::VectorId> queue_vectors_;
  std::map<int, std::deque<std::vector<std::uint32_t>>> hw_pending_;

  Dfq dfq_;
  std::deque<std::uint32_t> frame_queue_;
  std::optional<DfqEntry> executing_;
  std::map<int, DeferrableServer> servers_;
  std::map<int, std::uint64_t> admitted_;
  DeferrableServer gate_;
  bool gated_ = false;
  StackMode mode_ = StackMode::isr_driven;
  std::deque<std::uint32_t> poll_backlog_;
  std::uint64_t boundary_gen_ = 0;

  std::uint64_t processed_ = 0;
  std::vector<std::pair<SimTime, StackMode>> mode_log_;
  std::vector<std::pair<SimTime, int>> priority_log_;
};

}  // namespace rtrx::rxstack
