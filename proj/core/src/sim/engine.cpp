#include "rtrx/sim/engine.hpp"

#include <stdexcept>

namespace rtrx::sim {

Engine::Engine() = default;

void Engine::emit(CpuEventKind kind, SubjectKind sk, std::uint16_t subject,
                  std::int32_t detail) {
  if (!record_trace_) return;
  trace_.append(CpuEvent{now_, kind, sk, subject, detail});
}

EventId Engine::schedule(SimTime t, EventKind kind, std::function<void()> fn) {
  if (t < now_) {
    throw std::invalid_argument("schedule: event time is in the past");
  }
  return schedule_internal(t, kind, std::move(fn));
}

EventId Engine::schedule_internal(SimTime t, EventKind kind,
                                  std::function<void()> fn) {
  std::uint64_t seq = ++seq_;
  heap_.push(HeapEntry{t, static_cast<std::uint8_t>(kind), seq});
  pending_fns_.emplace(seq, std::move(fn));
  return seq;
}

void Engine::cancel(EventId id) {
  if (pending_fns_.count(id)) cancelled_.insert(id);
}

void Engine::run_until(SimTime t_end) {
  if (t_end < now_) {
    throw std::invalid_argument("run_until: horizon is in the past");
  }
  while (!heap_.empty() && heap_.top().t <= t_end) {
    HeapEntry e = heap_.top();
    heap_.pop();
    auto it = pending_fns_.find(e.seq);
    if (it == pending_fns_.end()) continue;
    if (cancelled_.erase(e.seq)) {
      pending_fns_.erase(it);
      continue;
    }
    std::function<void()> fn = std::move(it->second);
    pending_fns_.erase(it);
    now_ = e.t;
    fn();
  }
  now_ = t_end;
  // Settle partial slices so accounting queries are exact at the horizon.
  if (running_task_ != kNoTask) {
    TaskState& t = tasks_[running_task_];
    SimDuration elapsed = now_ - t.slice_start;
    t.cpu += elapsed;
    t.remaining -= elapsed;
    t.slice_start = now_;
  }
  if (isr_active_) {
    irq_time_ += now_ - isr_enter_time_;
    isr_enter_time_ = now_;
  }
}

TaskId Engine::add_task(const TaskSpec& spec) {
  TaskId id = static_cast<TaskId>(tasks_.size());
  TaskState st;
  st.spec = spec;
  st.priority = spec.priority;
  tasks_.push_back(std::move(st));
  trace_task_ids_.push_back(trace_.intern_task(spec.name));
  return id;
}

bool Engine::task_ready(const TaskState& t) const {
  return !t.jobs.empty() || (t.source && t.source_armed);
}

void Engine::make_ready(TaskId id) {
  TaskState& t = tasks_[id];
  if (t.ready_since < 0) {
    t.ready_since = now_;
    t.ready_seq = ++ready_counter_;
  }
}

void Engine::request_cpu(TaskId id, SimDuration work,
                         std::function<void()> on_complete) {
  if (id >= tasks_.size()) throw std::invalid_argument("request_cpu: unknown task");
  if (work < 0) throw std::invalid_argument("request_cpu: negative duration");
  TaskState& t = tasks_[id];
  bool was_ready = task_ready(t);
  t.jobs.push_back(Job{work, std::move(on_complete)});
  if (t.jobs.size() == 1 && !t.running) t.remaining = t.jobs.front().work;
  if (!was_ready) make_ready(id);
  reschedule();
}

void Engine::set_job_source(TaskId id,
                            std::function<std::optional<Job>()> source) {
  if (id >= tasks_.size()) throw std::invalid_argument("set_job_source: unknown task");
  tasks_[id].source = std::move(source);
}

void Engine::wake(TaskId id) {
  if (id >= tasks_.size()) throw std::invalid_argument("wake: unknown task");
  TaskState& t = tasks_[id];
  if (!t.source) return;
  bool was_ready = task_ready(t);
  t.source_armed = true;
  if (!was_ready) {
    make_ready(id);
    reschedule();
  }
}

void Engine::set_task_priority(TaskId id, int priority) {
  if (id >= tasks_.size()) throw std::invalid_argument("set_task_priority: unknown task");
  if (tasks_[id].priority == priority) return;
  tasks_[id].priority = priority;
  reschedule();
}

int Engine::task_priority(TaskId id) const { return tasks_.at(id).priority; }

bool Engine::task_idle(TaskId id) const {
  const TaskState& t = tasks_.at(id);
  return !t.running && t.jobs.empty();
}

VectorId Engine::register_vector(const std::string& name,
                                 std::function<SimDuration()> handler) {
  VectorId id = static_cast<VectorId>(vectors_.size());
  vectors_.push_back(VectorState{name, std::move(handler), 0});
  trace_vector_ids_.push_back(trace_.intern_vector(name));
  return id;
}

void Engine::raise_irq(VectorId vec) {
  if (vec >= vectors_.size()) throw std::invalid_argument("raise_irq: unknown vector");
  PendingIrq p{vec, -1};
  if (isr_active_) {
    latched_.push_back(p);
  } else {
    serve_irq(p);
  }
}

void Engine::raise_irq(VectorId vec, SimDuration isr_duration) {
  if (vec >= vectors_.size()) throw std::invalid_argument("raise_irq: unknown vector");
  if (isr_duration < 0) throw std::invalid_argument("raise_irq: negative duration");
  PendingIrq p{vec, isr_duration};
  if (isr_active_) {
    latched_.push_back(p);
  } else {
    serve_irq(p);
  }
}

void Engine::clear_latched(VectorId vec) {
  std::deque<PendingIrq> kept;
  for (const PendingIrq& p : latched_) {
    if (p.vec != vec) kept.push_back(p);
  }
  latched_.swap(kept);
}

void Engine::record_mode_switch(int detail) {
  emit(CpuEventKind::mode_switch, SubjectKind::system, 0, detail);
}

void Engine::serve_irq(const PendingIrq& p) {
  if (running_task_ != kNoTask) preempt_running();
  isr_active_ = true;
  active_vector_ = p.vec;
  isr_enter_time_ = now_;
  VectorState& v = vectors_[p.vec];
  v.count++;
  total_irqs_++;
  emit(CpuEventKind::isr_enter, SubjectKind::irq_vector,
       trace_vector_ids_[p.vec], 0);
  SimDuration dur = p.fixed >= 0 ? p.fixed : (v.handler ? v.handler() : 0);
  if (dur < 0) dur = 0;
  schedule_internal(now_ + dur, EventKind::release, [this] { finish_isr(); });
}

void Engine::finish_isr() {
  irq_time_ += now_ - isr_enter_time_;
  emit(CpuEventKind::isr_exit, SubjectKind::irq_vector,
       trace_vector_ids_[active_vector_], 0);
  isr_active_ = false;
  if (!latched_.empty()) {
    PendingIrq p = latched_.front();
    latched_.pop_front();
    serve_irq(p);
  } else {
    reschedule();
  }
}

void Engine::preempt_running() {
  TaskState& t = tasks_[running_task_];
  SimDuration elapsed = now_ - t.slice_start;
  t.cpu += elapsed;
  t.remaining -= elapsed;
  t.running = false;
  t.slice_gen++;
  emit(CpuEventKind::task_preempt, SubjectKind::task,
       trace_task_ids_[running_task_], t.priority);
  running_task_ = kNoTask;
}

TaskId Engine::pick_next() {
  for (;;) {
    TaskId best = kNoTask;
    for (TaskId i = 0; i < tasks_.size(); ++i) {
      TaskState& t = tasks_[i];
      if (!task_ready(t)) continue;
      if (best == kNoTask) {
        best = i;
        continue;
      }
      TaskState& b = tasks_[best];
      if (t.priority > b.priority ||
          (t.priority == b.priority &&
           (t.ready_since < b.ready_since ||
            (t.ready_since == b.ready_since && t.ready_seq < b.ready_seq)))) {
        best = i;
      }
    }
    if (best == kNoTask) return kNoTask;
    TaskState& t = tasks_[best];
    if (!t.jobs.empty()) return best;
    // Pull from the job source; it may decline, blocking the task.
    std::optional<Job> job = t.source();
    if (job.has_value()) {
      t.jobs.push_back(std::move(*job));
      t.job_started = false;
      t.remaining = t.jobs.front().work;
      return best;
    }
    t.source_armed = false;
    if (t.jobs.empty()) t.ready_since = -1;
  }
}

void Engine::start_slice(TaskId id) {
  TaskState& t = tasks_[id];
  if (!t.job_started) {
    t.job_started = true;
    emit(CpuEventKind::task_start, SubjectKind::task, trace_task_ids_[id],
         t.priority);
  } else {
    emit(CpuEventKind::task_resume, SubjectKind::task, trace_task_ids_[id],
         t.priority);
  }
  t.running = true;
  t.slice_start = now_;
  std::uint64_t gen = ++t.slice_gen;
  running_task_ = id;
  schedule_internal(now_ + t.remaining, EventKind::release,
                    [this, id, gen] { complete_slice(id, gen); });
}

void Engine::complete_slice(TaskId id, std::uint64_t gen) {
  TaskState& t = tasks_[id];
  if (!t.running || t.slice_gen != gen) return;  // superseded slice
  SimDuration elapsed = now_ - t.slice_start;
  t.cpu += elapsed;
  t.remaining = 0;
  t.running = false;
  t.slice_gen++;
  emit(CpuEventKind::task_end, SubjectKind::task, trace_task_ids_[id],
       t.priority);
  Job job = std::move(t.jobs.front());
  t.jobs.pop_front();
  t.job_started = false;
  if (!t.jobs.empty()) {
    t.remaining = t.jobs.front().work;
  } else if (!(t.source && t.source_armed)) {
    t.ready_since = -1;
  }
  running_task_ = kNoTask;
  if (job.on_complete) job.on_complete();
  reschedule();
}

void Engine::reschedule() {
  if (isr_active_) {
    if (running_task_ != kNoTask) preempt_running();
    return;
  }
  TaskId best = pick_next();
  if (best == running_task_) return;
  if (running_task_ != kNoTask) preempt_running();
  if (best != kNoTask) start_slice(best);
}

SimDuration Engine::task_cpu_time(TaskId id) const { return tasks_.at(id).cpu; }

SimDuration Engine::busy_time() const {
  SimDuration total = irq_time_;
  for (const TaskState& t : tasks_) total += t.cpu;
  return total;
}

std::uint64_t Engine::irq_count(VectorId vec) const {
  return vectors_.at(vec).count;
}

const std::string& Engine::task_name(TaskId id) const {
  return tasks_.at(id).spec.name;
}

TaskKind Engine::task_kind(TaskId id) const { return tasks_.at(id).spec.kind; }

}  // namespace rtrx::sim
