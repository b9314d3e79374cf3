#include "rtrx/rxstack/rxstack.hpp"

#include <algorithm>
#include <stdexcept>

namespace rtrx::rxstack {

const char* to_string(PipelineMode m) {
  switch (m) {
    case PipelineMode::baseline: return "baseline";
    case PipelineMode::baseline_mitigated: return "baseline-mitigated";
    case PipelineMode::software: return "software";
    case PipelineMode::hardware: return "hardware";
    case PipelineMode::unified: return "unified";
  }
  return "?";
}

std::optional<PipelineMode> pipeline_mode_from_string(const std::string& s) {
  if (s == "baseline") return PipelineMode::baseline;
  if (s == "baseline-mitigated") return PipelineMode::baseline_mitigated;
  if (s == "software") return PipelineMode::software;
  if (s == "hardware") return PipelineMode::hardware;
  if (s == "unified") return PipelineMode::unified;
  return std::nullopt;
}

RxStack::RxStack(sim::Engine& engine, nic::BdRing& ring,
                 flows::FlowTable& table, flows::PacketStore& packets,
                 Config cfg, DeliverFn deliver)
    : engine_(engine),
      ring_(ring),
      table_(table),
      packets_(packets),
      cfg_(std::move(cfg)),
      deliver_(std::move(deliver)) {
  modified_stack_ = cfg_.mode == PipelineMode::software ||
                    cfg_.mode == PipelineMode::unified;

  int net_prio = modified_stack_ ? cfg_.priority_floor : cfg_.net_task_priority;
  net_task_ = engine_.add_task(
      {"net-task", net_prio, sim::TaskKind::network_task});
  engine_.set_job_source(net_task_, [this] { return net_source(); });
  priority_log_.emplace_back(0, net_prio);
  mode_log_.emplace_back(0, StackMode::isr_driven);

  if (cfg_.gate.has_value()) {
    if (cfg_.mode == PipelineMode::baseline ||
        cfg_.mode == PipelineMode::hardware) {
      throw std::invalid_argument(
          "global rate limitation is not part of this pipeline mode");
    }
    gated_ = true;
    gate_ = DeferrableServer(cfg_.gate->capacity, cfg_.gate->period);
    if (cfg_.poll_period <= 0) cfg_.poll_period = cfg_.gate->period;
    if (cfg_.poll_period > cfg_.gate->period) {
      throw std::invalid_argument("poll period must not exceed the gate period");
    }
    poll_task_ = engine_.add_task(
        {"poll-driver", cfg_.poll_priority, sim::TaskKind::polling_driver});
    engine_.set_job_source(poll_task_, [this] { return poll_source(); });
  }

  if (cfg_.mode != PipelineMode::hardware) {
    rx_vector_ = engine_.register_vector("rx", [this]() -> SimDuration {
      return cfg_.mode == PipelineMode::unified ? isr_unified()
                                                : isr_rx_single();
    });
  }

  for (const flows::FlowSpec& f : table_.flows()) on_flow_bound(f);
}

void RxStack::on_flow_bound(const flows::FlowSpec& spec) {
  if (spec.server_capacity.has_value()) {
    servers_[spec.flow_id] =
        DeferrableServer(spec.server_capacity, spec.server_period);
  }
}

void RxStack::on_flow_unbound(int flow_id) { servers_.erase(flow_id); }

DeferrableServer* RxStack::flow_server(int flow_id) {
  auto it = servers_.find(flow_id);
  return it == servers_.end() ? nullptr : &it->second;
}

int RxStack::flow_priority(int flow_id) const {
  if (flow_id == kBackgroundFlow) return cfg_.priority_floor;
  const flows::FlowSpec* f = table_.find(flow_id);
  return f ? f->priority : cfg_.priority_floor;
}

int RxStack::net_task_current_priority() const {
  return engine_.task_priority(net_task_);
}

int RxStack::nettask_target_priority() const {
  int target = cfg_.priority_floor;
  if (executing_.has_value()) target = std::max(target, executing_->priority);
  if (auto h = dfq_.highest_priority()) target = std::max(target, *h);
  return target;
}

std::uint64_t RxStack::admissions(int flow_id) const {
  auto it = admitted_.find(flow_id);
  return it == admitted_.end() ? 0 : it->second;
}

void RxStack::set_net_priority(int prio) {
  engine_.set_task_priority(net_task_, prio);
  priority_log_.emplace_back(engine_.now(), prio);
}

sim::VectorId RxStack::vector_for_queue(int queue_id) {
  auto it = queue_vectors_.find(queue_id);
  if (it != queue_vectors_.end()) return it->second;
  sim::VectorId vec = engine_.register_vector(
      "rxq" + std::to_string(queue_id),
      [this, queue_id]() -> SimDuration { return isr_hw_queue(queue_id); });
  queue_vectors_.emplace(queue_id, vec);
  return vec;
}

// ---------------------------------------------------------------------------
// NIC entry points

void RxStack::packet_arrival(std::uint32_t packet_id) {
  flows::PacketRecord& p = packets_[packet_id];
  if (!ring_.accept(packet_id)) {
    p.dispose(flows::Disposition::dropped_bd_starved);
    return;
  }
  if (gated_ && mode_ == StackMode::polling) return;  // RX IRQ masked
  engine_.raise_irq(rx_vector_);
}

void RxStack::hw_batch(int queue_id, const std::vector<std::uint32_t>& batch) {
  if (batch.empty()) return;
  for (std::uint32_t id : batch) {
    packets_[id].set_stage(flows::Stage::irq, engine_.now());
  }
  hw_pending_[queue_id].push_back(batch);
  engine_.raise_irq(vector_for_queue(queue_id));
}

void RxStack::unified_batch(int queue_id,
                            const std::vector<std::uint32_t>& batch) {
  (void)queue_id;
  bool announce = !gated_ || mode_ == StackMode::isr_driven;
  bool any = false;
  for (std::uint32_t id : batch) {
    flows::PacketRecord& p = packets_[id];
    if (!ring_.accept(id)) {
      p.dispose(flows::Disposition::dropped_bd_starved);
      continue;
    }
    if (announce) p.set_stage(flows::Stage::irq, engine_.now());
    any = true;
  }
  if (any && announce) engine_.raise_irq(rx_vector_);
}

// ---------------------------------------------------------------------------
// ISR bodies (run when service begins; return the IRQ-context duration)

SimDuration RxStack::isr_rx_single() {
  if (ring_.pending() == 0) return 0;
  if (gated_) {
    if (!gate_.try_debit(engine_.now())) {
      enter_polling();
      return 0;
    }
  }
  std::uint32_t pkt = *ring_.consume();
  packets_[pkt].set_stage(flows::Stage::irq, engine_.now());
  SimDuration cost = cfg_.costs.irq_overhead;
  if (modified_stack_) {
    cost += process_modified(pkt, true, nullptr);
  } else {
    cost += process_original(pkt);
  }
  if (gated_ && mode_ == StackMode::isr_driven &&
      gate_.remaining(engine_.now()) == 0) {
    enter_polling();
  }
  return cost;
}

SimDuration RxStack::isr_hw_queue(int queue_id) {
  auto& pending = hw_pending_[queue_id];
  if (pending.empty()) return 0;
  std::vector<std::uint32_t> batch = std::move(pending.front());
  pending.pop_front();
  SimDuration cost = cfg_.costs.irq_overhead;
  for (std::uint32_t id : batch) {
    cost += cfg_.costs.isr_eager_full;
    frame_queue_.push_back(id);
    processed_++;
  }
  engine_.wake(net_task_);
  return cost;
}

SimDuration RxStack::isr_unified() {
  SimDuration cost = cfg_.costs.irq_overhead;
  int deferred_raise = net_task_current_priority();
  while (ring_.pending() > 0) {
    if (gated_ && !gate_.try_debit(engine_.now())) {
      enter_polling();
      break;
    }
    std::uint32_t pkt = *ring_.consume();
    cost += process_modified(pkt, true, &deferred_raise);
  }
  // The network-task priority comparison happens once at the end of the
  // batch rather than per packet.
  if (deferred_raise > net_task_current_priority()) {
    cost += cfg_.costs.prio_raise;
    set_net_priority(deferred_raise);
  }
  if (gated_ && mode_ == StackMode::isr_driven &&
      gate_.remaining(engine_.now()) == 0) {
    enter_polling();
  }
  return cost;
}

// ---------------------------------------------------------------------------
// Eager driver (software/unified), shared by ISR and polling contexts

SimDuration RxStack::process_modified(std::uint32_t packet_id, bool via_isr,
                                      int* deferred_raise) {
  SimDuration cost = process_modified_inner(packet_id, via_isr, deferred_raise);
  packets_[packet_id].isr_cost_ns = static_cast<std::int32_t>(cost);
  return cost;
}

SimDuration RxStack::process_modified_inner(std::uint32_t packet_id,
                                            bool via_isr, int* deferred_raise) {
  flows::PacketRecord& p = packets_[packet_id];
  SimTime now = engine_.now();
  processed_++;

  bool unified = cfg_.mode == PipelineMode::unified;
  SimDuration base, sc_cost;
  if (!via_isr) {
    base = sc_cost = cfg_.costs.poll_packet;
  } else if (unified) {
    base = sc_cost = cfg_.costs.isr_enqueue;
  } else if (cfg_.cache_deferral) {
    base = cfg_.costs.isr_classify;
    sc_cost = cfg_.costs.shortcircuit;
  } else {
    base = sc_cost = cfg_.costs.isr_eager_full;
  }

  // (1) classification; unified descriptors already carry the flow id.
  int flow_id;
  if (unified) {
    flow_id = p.flow_id;
  } else {
    auto hit = table_.classify(p.header);
    if (hit.has_value()) {
      flow_id = *hit;
    } else if (table_.unmatched_action() == flows::DefaultAction::drop) {
      p.set_stage(flows::Stage::classified, now);
      p.path = flows::IsrPath::shortcircuit;
      p.dispose(flows::Disposition::dropped_unregistered);
      p.recycled_at = now;
      ring_.release_buffer();
      return sc_cost;
    } else {
      flow_id = kBackgroundFlow;
    }
    p.flow_id = flow_id;
  }
  if (!p.has_stage(flows::Stage::classified)) {
    p.set_stage(flows::Stage::classified, now);
  }
  int prio = flow_priority(flow_id);

  // (2) short-circuiting branch: under buffer pressure the lowest-priority
  // packet is the arriving one, so it is recycled without being queued.
  if (cfg_.shortcircuit_enabled && ring_.below(cfg_.recycle_threshold)) {
    auto low = dfq_.lowest_priority();
    if (!low.has_value() || prio <= *low) {
      p.path = flows::IsrPath::shortcircuit;
      p.dispose(flows::Disposition::recycled);
      p.recycled_at = now;
      ring_.release_buffer();
      return sc_cost;
    }
  }

  // (3) per-flow rate limitation at insert time.
  DeferrableServer* srv = flow_server(flow_id);
  if (srv != nullptr && !srv->try_debit(now)) {
    p.path = flows::IsrPath::mitigated;
    p.dispose(flows::Disposition::dropped_mitigated);
    p.recycled_at = now;
    ring_.release_buffer();
    return sc_cost;
  }
  admitted_[flow_id]++;

  // (4) insert, then recycle a buffered packet if the ring is still low.
  dfq_.insert(packet_id, flow_id, prio);
  SimDuration cost = base;
  bool recycled_other = false;
  bool self_recycled = false;
  if (ring_.below(cfg_.recycle_threshold)) {
    DfqEntry victim = dfq_.recycle_lowest(cfg_.recycle_drop_head);
    flows::PacketRecord& v = packets_[victim.packet_id];
    v.dispose(flows::Disposition::recycled);
    v.recycled_at = now;
    ring_.release_buffer();
    cost += cfg_.costs.recycle;
    if (victim.packet_id == packet_id) {
      self_recycled = true;
    } else {
      recycled_other = true;
    }
  }
  if (self_recycled) {
    // The packet never survived into a flow queue; no wakeup, no raise.
    p.path = flows::IsrPath::regular_recycle;
    return cost;
  }

  // (5) unblock the network task; raise its priority iff strictly higher.
  engine_.wake(net_task_);
  bool raised = false;
  if (deferred_raise != nullptr) {
    if (prio > *deferred_raise) {
      *deferred_raise = prio;
      raised = true;  // per-packet tag; the cost lands once per batch
    }
  } else if (prio > net_task_current_priority()) {
    cost += cfg_.costs.prio_raise;
    set_net_priority(prio);
    raised = true;
  }
  if (recycled_other && raised) {
    p.path = flows::IsrPath::regular_recycle_prio_raise;
  } else if (recycled_other) {
    p.path = flows::IsrPath::regular_recycle;
  } else if (raised) {
    p.path = flows::IsrPath::regular_prio_raise;
  } else {
    p.path = flows::IsrPath::regular;
  }
  return cost;
}

SimDuration RxStack::process_original(std::uint32_t packet_id) {
  processed_++;
  frame_queue_.push_back(packet_id);
  packets_[packet_id].isr_cost_ns =
      static_cast<std::int32_t>(cfg_.costs.isr_eager_full);
  engine_.wake(net_task_);
  return cfg_.costs.isr_eager_full;
}

// ---------------------------------------------------------------------------
// Network task

std::optional<sim::Job> RxStack::net_source() {
  if (modified_stack_) {
    if (dfq_.empty()) return std::nullopt;
    DfqEntry e = dfq_.pop_highest();
    executing_ = e;
    flows::PacketRecord& p = packets_[e.packet_id];
    p.set_stage(flows::Stage::dequeued, engine_.now());
    SimDuration deferred = cfg_.cache_deferral ? cfg_.costs.deferred_driver : 0;
    std::uint32_t pkt = e.packet_id;
    int flow = e.flow_id;
    int prio = e.priority;
    return sim::Job{deferred, [this, pkt, flow, prio] {
      // Deferred driver done: full cache coherency established and a fresh
      // buffer appended to the BD ring.
      ring_.release_buffer();
      engine_.request_cpu(net_task_, cfg_.costs.stack + cfg_.costs.deliver,
                          [this, pkt, flow, prio] {
                            finish_packet(pkt, flow, prio);
                          });
    }};
  }

  if (frame_queue_.empty()) return std::nullopt;
  std::uint32_t pkt = frame_queue_.front();
  frame_queue_.pop_front();
  flows::PacketRecord& p = packets_[pkt];
  auto hit = table_.classify(p.header);
  int flow = hit.has_value() ? *hit : kBackgroundFlow;
  p.flow_id = flow;
  p.set_stage(flows::Stage::classified, engine_.now());
  p.set_stage(flows::Stage::dequeued, engine_.now());
  bool pooled = cfg_.mode == PipelineMode::baseline ||
                cfg_.mode == PipelineMode::baseline_mitigated;
  return sim::Job{cfg_.costs.stack + cfg_.costs.deliver, [this, pkt, flow, pooled] {
    if (pooled) ring_.release_buffer();
    flows::PacketRecord& q = packets_[pkt];
    q.set_stage(flows::Stage::stack_done, engine_.now());
    deliver_(pkt, flow);
  }};
}

void RxStack::finish_packet(std::uint32_t packet_id, int flow_id,
                            int flow_priority) {
  (void)flow_priority;
  flows::PacketRecord& p = packets_[packet_id];
  p.set_stage(flows::Stage::stack_done, engine_.now());
  executing_.reset();
  deliver_(packet_id, flow_id);
  int target = nettask_target_priority();
  if (target != net_task_current_priority()) set_net_priority(target);
}

// ---------------------------------------------------------------------------
// Global rate limitation and the polling fallback

void RxStack::enter_polling() {
  if (!gated_ || mode_ == StackMode::polling) return;
  mode_ = StackMode::polling;
  mode_log_.emplace_back(engine_.now(), mode_);
  engine_.record_mode_switch(1);
  engine_.clear_latched(rx_vector_);
  std::uint64_t gen = ++boundary_gen_;
  engine_.schedule(gate_.next_boundary(engine_.now()), sim::EventKind::timer,
                   [this, gen] {
                     if (gen != boundary_gen_) return;
                     on_gate_boundary();
                   });
  if (cfg_.poll_period != cfg_.gate->period) {
    engine_.schedule(engine_.now() + cfg_.poll_period, sim::EventKind::timer,
                     [this, gen] {
                       if (gen != boundary_gen_) return;
                       on_poll_tick();
                     });
  }
}

void RxStack::exit_polling() {
  mode_ = StackMode::isr_driven;
  mode_log_.emplace_back(engine_.now(), mode_);
  engine_.record_mode_switch(0);
  ++boundary_gen_;
}

void RxStack::on_gate_boundary() {
  if (mode_ != StackMode::polling) return;
  std::uint64_t budget = gate_.remaining(engine_.now());
  std::uint64_t backlog = static_cast<std::uint64_t>(ring_.pending());
  if (backlog < budget) {
    // Capacity is not immediately reached at the begin of this period:
    // drain what is there and return to ISR-driven reception.
    retrieve_for_polling(backlog);
    exit_polling();
    return;
  }
  retrieve_for_polling(budget);
  std::uint64_t gen = boundary_gen_;
  engine_.schedule(gate_.next_boundary(engine_.now()), sim::EventKind::timer,
                   [this, gen] {
                     if (gen != boundary_gen_) return;
                     on_gate_boundary();
                   });
}

void RxStack::on_poll_tick() {
  if (mode_ != StackMode::polling) return;
  std::uint64_t budget = gate_.remaining(engine_.now());
  std::uint64_t backlog = static_cast<std::uint64_t>(ring_.pending());
  retrieve_for_polling(std::min(budget, backlog));
  std::uint64_t gen = boundary_gen_;
  engine_.schedule(engine_.now() + cfg_.poll_period, sim::EventKind::timer,
                   [this, gen] {
                     if (gen != boundary_gen_) return;
                     on_poll_tick();
                   });
}

void RxStack::retrieve_for_polling(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) {
    auto pkt = ring_.consume();
    if (!pkt.has_value()) break;
    bool ok = gate_.try_debit(engine_.now());
    (void)ok;
    poll_backlog_.push_back(*pkt);
  }
  if (!poll_backlog_.empty()) engine_.wake(poll_task_);
}

std::optional<sim::Job> RxStack::poll_source() {
  if (poll_backlog_.empty()) return std::nullopt;
  std::uint32_t pkt = poll_backlog_.front();
  poll_backlog_.pop_front();
  // The base retrieval cost is charged up front; path-dependent extras are
  // charged right after the effects are applied.
  return sim::Job{cfg_.costs.poll_packet, [this, pkt] {
    SimDuration total = cfg_.costs.poll_packet;
    if (modified_stack_) {
      total = process_modified(pkt, false, nullptr);
    } else {
      frame_queue_.push_back(pkt);
      processed_++;
      engine_.wake(net_task_);
    }
    SimDuration extra = total - cfg_.costs.poll_packet;
    if (extra > 0) engine_.request_cpu(poll_task_, extra);
  }};
}

}  // namespace rtrx::rxstack
