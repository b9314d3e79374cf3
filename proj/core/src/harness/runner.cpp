#include "rtrx/harness/runner.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>

#include "rtrx/nic/bd_ring.hpp"
#include "rtrx/nic/mq_nic.hpp"

namespace rtrx::harness {

namespace {

namespace fs = std::filesystem;
using rxstack::PipelineMode;

struct Pipeline {
  const Scenario& sc;
  sim::Engine engine;
  flows::FlowTable table;
  nic::BdRing ring;
  std::unique_ptr<nic::MqNic> mq;
  flows::PacketStore packets;
  std::vector<traffic::Arrival> arrivals;
  std::unique_ptr<rxstack::RxStack> stack;

  std::map<int, sim::TaskId> workers;           // flow id -> worker task
  std::map<int, SimDuration> worker_workload;   // flow id -> per-packet work
  std::map<int, int> queue_flow;                // queue id -> flow id
  std::map<int, std::string> flow_names;
  std::map<sim::TaskId, std::uint64_t> worker_packets;
  std::map<sim::TaskId, SimDuration> worker_interference;
  std::vector<sim::TaskId> monitor_tasks;
  std::vector<std::tuple<SimTime, int, int>> fire_events;
  std::size_t next_arrival = 0;

  bool mq_mode() const {
    return sc.mode == PipelineMode::hardware || sc.mode == PipelineMode::unified;
  }

  explicit Pipeline(const Scenario& scenario)
      : sc(scenario),
        table(scenario.unmatched_action()),
        ring(scenario.ring_capacity) {}

  void build() {
    // Traffic is generated up front; arrival events are chained lazily.
    std::vector<std::vector<traffic::Arrival>> streams;
    for (std::size_t i = 0; i < sc.sources.size(); ++i) {
      streams.push_back(traffic::generate(sc.sources[i], sc.duration, sc.seed,
                                          static_cast<std::uint16_t>(i)));
    }
    arrivals = traffic::merge(std::move(streams));
    packets.reserve(arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      flows::PacketRecord p;
      p.id = static_cast<std::uint32_t>(i);
      p.source_idx = arrivals[i].source_idx;
      p.header = arrivals[i].header;
      p.payload_len = arrivals[i].payload_len;
      packets.push_back(p);
    }

    if (mq_mode()) {
      mq = std::make_unique<nic::MqNic>(
          engine, [this](int queue, const std::vector<std::uint32_t>& batch) {
            on_mq_batch(queue, batch);
          });
      for (const QueueDecl& q : sc.queues) {
        mq->configure(nic::QueueConfig{q.id, q.n_q, q.t_abs, q.t_pack,
                                       q.counter, q.r_max_pps});
      }
    }

    rxstack::RxStack::Config cfg;
    cfg.mode = sc.mode;
    cfg.costs = sc.costs;
    cfg.net_task_priority = sc.net_task_priority;
    cfg.priority_floor = sc.priority_floor;
    cfg.gate = sc.gate;
    cfg.poll_period = sc.poll_period;
    cfg.poll_priority = sc.poll_priority;
    cfg.recycle_threshold = sc.recycle_threshold;
    cfg.recycle_drop_head = sc.recycle_drop_head;
    cfg.shortcircuit_enabled = sc.shortcircuit;
    cfg.cache_deferral = sc.cache_deferral;
    stack = std::make_unique<rxstack::RxStack>(
        engine, ring, table, packets, cfg,
        [this](std::uint32_t pkt, int flow) { deliver(pkt, flow); });

    for (const FlowDecl& f : sc.flows) {
      if (f.bind_at <= 0) {
        bind_flow(f);
      } else {
        const FlowDecl* decl = &f;
        engine.schedule(f.bind_at, sim::EventKind::generic,
                        [this, decl] { bind_flow(*decl); });
      }
    }

    for (const MonitorDecl& m : sc.monitors) {
      sim::TaskId id = engine.add_task(
          {m.name, m.priority, sim::TaskKind::background_load_monitor});
      SimDuration forever = sc.duration + 1;
      engine.set_job_source(id, [forever]() -> std::optional<sim::Job> {
        return sim::Job{forever, {}};
      });
      engine.wake(id);
      monitor_tasks.push_back(id);
    }

    if (!arrivals.empty()) {
      engine.schedule(arrivals[0].time, sim::EventKind::arrival,
                      [this] { on_arrival(); });
    }
  }

  void bind_flow(const FlowDecl& f) {
    flows::FlowSpec spec;
    spec.name = f.name;
    spec.src = f.src;
    spec.proto = f.proto;
    spec.dst_port = f.dst_port;
    spec.priority = f.priority;
    spec.min_period = f.period;
    spec.server_capacity = f.server_capacity;
    spec.server_period = f.server_period;
    int flow_id = table.bind(spec);
    flow_names[flow_id] = f.name;
    stack->on_flow_bound(*table.find(flow_id));

    if (f.worker.has_value()) {
      sim::TaskId worker = engine.add_task(
          {"worker-" + f.name, f.worker->priority, sim::TaskKind::worker});
      workers[flow_id] = worker;
      worker_workload[flow_id] = f.worker->workload;
    }

    // The NIC distribution map and queue set update atomically with the bind.
    if (mq_mode() && !f.queue.empty()) {
      const QueueDecl* q = sc.find_queue(f.queue);
      queue_flow[q->id] = flow_id;
      if (!mq->has_queue(q->id)) {
        mq->configure(nic::QueueConfig{q->id, q->n_q, q->t_abs, q->t_pack,
                                       q->counter, q->r_max_pps});
      }
      if (f.proto == flows::Protocol::arp || f.proto == flows::Protocol::icmp) {
        mq->map_protocol(f.proto, q->id);
      } else {
        mq->map_port(f.proto, f.dst_port, q->id);
      }
    }

    if (f.unbind_at >= 0) {
      int id = flow_id;
      const FlowDecl* decl = &f;
      engine.schedule(f.unbind_at, sim::EventKind::generic,
                      [this, id, decl] { unbind_flow(*decl, id); });
    }
  }

  void unbind_flow(const FlowDecl& f, int flow_id) {
    table.unbind(flow_id);
    stack->on_flow_unbound(flow_id);
    workers.erase(flow_id);  // socket closed; later deliveries miss
    if (mq_mode() && !f.queue.empty()) {
      const QueueDecl* q = sc.find_queue(f.queue);
      queue_flow.erase(q->id);
      mq->release_queue(q->id);
    }
  }

  void on_arrival() {
    const traffic::Arrival& a = arrivals[next_arrival];
    std::uint32_t id = static_cast<std::uint32_t>(next_arrival);
    ++next_arrival;
    if (next_arrival < arrivals.size()) {
      engine.schedule(arrivals[next_arrival].time, sim::EventKind::arrival,
                      [this] { on_arrival(); });
    }
    flows::PacketRecord& p = packets[id];
    p.set_stage(flows::Stage::nic_rx, engine.now());
    (void)a;

    if (!mq_mode()) {
      stack->packet_arrival(id);
      return;
    }
    int queue = -1;
    nic::MqRxResult res = mq->rx(id, p.header, &queue);
    switch (res) {
      case nic::MqRxResult::dropped_unregistered:
        p.dispose(flows::Disposition::dropped_unregistered);
        break;
      case nic::MqRxResult::dropped_queue_full:
        p.dispose(flows::Disposition::dropped_queue_full);
        break;
      case nic::MqRxResult::enqueued: {
        p.queue_id = static_cast<std::int16_t>(queue);
        auto it = queue_flow.find(queue);
        p.flow_id = it != queue_flow.end() ? it->second : rxstack::kBackgroundFlow;
        p.set_stage(flows::Stage::classified, engine.now());
        break;
      }
    }
  }

  void on_mq_batch(int queue, const std::vector<std::uint32_t>& batch) {
    fire_events.emplace_back(engine.now(), queue, static_cast<int>(batch.size()));
    if (sc.mode == PipelineMode::hardware) {
      stack->hw_batch(queue, batch);
    } else {
      stack->unified_batch(queue, batch);
    }
  }

  void deliver(std::uint32_t pkt, int flow) {
    flows::PacketRecord& p = packets[pkt];
    auto it = flow >= 0 ? workers.find(flow) : workers.end();
    if (it == workers.end()) {
      p.dispose(flows::Disposition::dropped_unregistered);
      return;
    }
    p.set_stage(flows::Stage::delivered, engine.now());
    p.dispose(flows::Disposition::delivered);
    sim::TaskId worker = it->second;
    SimDuration work = worker_workload[flow];
    SimTime release = engine.now();
    worker_packets[worker]++;
    engine.request_cpu(worker, work, [this, worker, work, release] {
      worker_interference[worker] += engine.now() - release - work;
    });
  }

  RunResult finish(bool with_trace) {
    RunResult r;
    r.scenario = sc;
    r.duration = sc.duration;
    r.packets = std::move(packets);
    r.irq_time = engine.irq_time();
    r.irq_total = engine.total_irq_count();
    if (mq) {
      for (int q : mq->queue_ids()) {
        r.irq_per_queue[q] = mq->fires(q);
        r.packets_per_queue[q] = mq->packets(q);
      }
    }
    r.fire_events = std::move(fire_events);
    r.mode_log = stack->mode_log();
    r.prio_log = stack->priority_log();
    r.flow_names = flow_names;
    r.processed = stack->processed_count();
    for (sim::TaskId id = 0; id < engine.task_count(); ++id) {
      TaskStat t;
      t.name = engine.task_name(id);
      t.kind = engine.task_kind(id);
      t.cpu = engine.task_cpu_time(id);
      auto pit = worker_packets.find(id);
      if (pit != worker_packets.end()) t.packets = pit->second;
      auto iit = worker_interference.find(id);
      if (iit != worker_interference.end()) t.interference = iit->second;
      r.tasks.push_back(std::move(t));
      switch (engine.task_kind(id)) {
        case sim::TaskKind::network_task: r.net_cpu += engine.task_cpu_time(id); break;
        case sim::TaskKind::polling_driver: r.poll_cpu += engine.task_cpu_time(id); break;
        case sim::TaskKind::background_load_monitor:
          r.monitor_cpu += engine.task_cpu_time(id);
          break;
        case sim::TaskKind::worker: r.worker_cpu += engine.task_cpu_time(id); break;
      }
    }
    if (with_trace) r.trace = engine.take_trace();
    return r;
  }
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& opts) {
  Pipeline p(scenario);
  p.engine.set_record_trace(opts.record_trace);
  p.build();
  p.engine.run_until(scenario.duration);
  return p.finish(opts.record_trace);
}

void write_run_outputs(const RunResult& result, const std::string& out_dir,
                       bool with_trace) {
  fs::create_directories(out_dir);
  write_metrics_csv(result, out_dir + "/metrics.csv");
  write_flows_csv(result, out_dir + "/flows.csv");
  if (with_trace) write_trace_csv(result, out_dir + "/trace.csv");
}

planner::PlanReport plan_scenario(const Scenario& scenario) {
  double t_netstack = to_us(scenario.mode == rxstack::PipelineMode::unified
                                ? scenario.costs.modified_total()
                                : scenario.costs.original_total());
  std::vector<planner::QueueInput> inputs;
  for (const QueueDecl& q : scenario.queues) {
    planner::QueueInput in;
    in.name = q.name;
    in.n_q = q.n_q;
    in.r_max_pps = q.r_max_pps;
    in.t_d_us = q.t_d_us;
    in.t_abs_us = to_us(q.t_abs);
    in.t_pack_us = to_us(q.t_pack);
    for (const FlowDecl& f : scenario.flows) {
      if (f.queue == q.name) in.t_p_us = to_us(f.period);
    }
    inputs.push_back(std::move(in));
  }
  return planner::validate(t_netstack, inputs);
}

}  // namespace rtrx::harness
