#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rtrx/sim/time.hpp"
#include "rtrx/sim/trace.hpp"

namespace rtrx::sim {

// Ordering rank for events that fire at the same nanosecond. Lower rank
// fires first; ties break by insertion order. `release` is reserved for
// engine-internal slice completions and ISR exits so a context that finishes
// exactly when an interrupt fires is retired before the interrupt runs.
enum class EventKind : std::uint8_t {
  release = 0,
  irq = 1,
  timer = 2,
  arrival = 3,
  wakeup = 4,
  generic = 5,
};

using TaskId = std::uint16_t;
using VectorId = std::uint16_t;
using EventId = std::uint64_t;

inline constexpr TaskId kNoTask = 0xffff;

enum class TaskKind : std::uint8_t {
  worker,
  network_task,
  polling_driver,
  background_load_monitor,
};

struct TaskSpec {
  std::string name;
  int priority = 0;
  TaskKind kind = TaskKind::worker;
};

// A unit of CPU demand. Tasks execute jobs strictly in FIFO order under
// fixed-priority preemption; a preempted job resumes with its remaining
// duration preserved.
struct Job {
  SimDuration work = 0;
  std::function<void()> on_complete;
};

// Deterministic discrete-event engine with a virtual single-core CPU.
//
// The CPU runs a fixed-priority preemptive task scheduler plus a single
// non-nesting interrupt level that preempts every task. ISR handlers run
// their model logic when service begins and return the wall-clock duration
// to charge to IRQ context. Identical inputs produce byte-identical traces.
class Engine {
 public:
  Engine();

  // -- event queue -------------------------------------------------------
  EventId schedule(SimTime t, EventKind kind, std::function<void()> fn);
  void cancel(EventId id);
  SimTime now() const { return now_; }

  // Processes every event with time <= t_end, then settles accounting at
  // t_end. May be called repeatedly with non-decreasing horizons.
  void run_until(SimTime t_end);

  // -- tasks --------------------------------------------------------------
  TaskId add_task(const TaskSpec& spec);
  // Queues `work` nanoseconds of CPU demand for the task.
  void request_cpu(TaskId id, SimDuration work,
                   std::function<void()> on_complete = {});
  // Lazily pulled when a task is dispatched with an empty job queue. The
  // source must not call back into the engine; returning nullopt blocks the
  // task until the next wake().
  void set_job_source(TaskId id, std::function<std::optional<Job>()> source);
  void wake(TaskId id);
  void set_task_priority(TaskId id, int priority);
  int task_priority(TaskId id) const;
  bool task_idle(TaskId id) const;

  // -- interrupts ----------------------------------------------------------
  VectorId register_vector(const std::string& name,
                           std::function<SimDuration()> handler = {});
  // Raises an IRQ now. ISRs do not nest: a raise during an active ISR is
  // latched and served back-to-back after isr-exit, in raise order.
  void raise_irq(VectorId vec);
  void raise_irq(VectorId vec, SimDuration isr_duration);
  // Drops latched (not yet served) raises of the vector; models masking.
  void clear_latched(VectorId vec);

  void record_mode_switch(int detail);

  // -- accounting ----------------------------------------------------------
  SimDuration task_cpu_time(TaskId id) const;
  SimDuration irq_time() const { return irq_time_; }
  SimDuration busy_time() const;
  std::uint64_t irq_count(VectorId vec) const;
  std::uint64_t total_irq_count() const { return total_irqs_; }
  std::size_t task_count() const { return tasks_.size(); }
  const std::string& task_name(TaskId id) const;
  TaskKind task_kind(TaskId id) const;

  const SimTrace& trace() const { return trace_; }
  SimTrace take_trace() { return std::move(trace_); }
  void set_record_trace(bool on) { record_trace_ = on; }

 private:
  struct HeapEntry {
    SimTime t;
    std::uint8_t rank;
    std::uint64_t seq;
    bool operator>(const HeapEntry& o) const {
      if (t != o.t) return t > o.t;
      if (rank != o.rank) return rank > o.rank;
      return seq > o.seq;
    }
  };

  struct TaskState {
    TaskSpec spec;
    int priority = 0;
    std::deque<Job> jobs;
    bool job_started = false;
    SimDuration remaining = 0;
    bool running = false;
    SimTime slice_start = 0;
    std::uint64_t slice_gen = 0;
    SimTime ready_since = -1;
    std::uint64_t ready_seq = 0;
    std::function<std::optional<Job>()> source;
    bool source_armed = false;
    SimDuration cpu = 0;
  };

  struct PendingIrq {
    VectorId vec;
    SimDuration fixed = -1;  // <0: ask the handler at service time
  };

  struct VectorState {
    std::string name;
    std::function<SimDuration()> handler;
    std::uint64_t count = 0;
  };

  void emit(CpuEventKind kind, SubjectKind sk, std::uint16_t subject,
            std::int32_t detail);
  EventId schedule_internal(SimTime t, EventKind kind,
                            std::function<void()> fn);
  bool task_ready(const TaskState& t) const;
  TaskId pick_next();
  void make_ready(TaskId id);
  void preempt_running();
  void start_slice(TaskId id);
  void complete_slice(TaskId id, std::uint64_t gen);
  void reschedule();
  void serve_irq(const PendingIrq& p);
  void finish_isr();

  SimTime now_ = 0;
  std::uint64_t seq_ = 0;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::vector<TaskState> tasks_;
  std::vector<VectorState> vectors_;
  std::vector<std::uint16_t> trace_task_ids_;
  std::vector<std::uint16_t> trace_vector_ids_;

  TaskId running_task_ = kNoTask;
  bool isr_active_ = false;
  VectorId active_vector_ = 0;
  SimTime isr_enter_time_ = 0;
  std::deque<PendingIrq> latched_;

  SimDuration irq_time_ = 0;
  std::uint64_t total_irqs_ = 0;
  std::uint64_t ready_counter_ = 0;

  SimTrace trace_;
  bool record_trace_ = true;

  std::unordered_map<std::uint64_t, std::function<void()>> pending_fns_;
};

}  // namespace rtrx::sim
