#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtrx/sim/time.hpp"

namespace rtrx::sim {

enum class CpuEventKind : std::uint8_t {
  task_start,
  task_preempt,
  task_resume,
  task_end,
  isr_enter,
  isr_exit,
  mode_switch,
};

const char* to_string(CpuEventKind kind);

enum class SubjectKind : std::uint8_t { task, irq_vector, system };

// One scheduling event on the simulated CPU. `detail` carries the current
// task priority for task events, the vector's batch hint for ISR events and
// the new mode for mode_switch (1 = polling, 0 = isr-driven).
struct CpuEvent {
  SimTime time;
  CpuEventKind kind;
  SubjectKind subject_kind;
  std::uint16_t subject;
  std::int32_t detail;
};

class SimTrace {
 public:
  void append(const CpuEvent& ev) { events_.push_back(ev); }
  const std::vector<CpuEvent>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  std::size_t size() const { return events_.size(); }
  void clear() { events_.clear(); }

  // Subject names are owned by the trace so it stays self-describing after
  // the engine is gone.
  std::uint16_t intern_task(const std::string& name);
  std::uint16_t intern_vector(const std::string& name);
  const std::string& task_name(std::uint16_t id) const { return tasks_[id]; }
  const std::string& vector_name(std::uint16_t id) const { return vectors_[id]; }
  const std::string& subject_name(const CpuEvent& ev) const;

  // CSV columns: time_ns,kind,subject,detail (header row included).
  void write_csv(std::ostream& out) const;

  bool operator==(const SimTrace& other) const;

 private:
  std::vector<CpuEvent> events_;
  std::vector<std::string> tasks_;
  std::vector<std::string> vectors_;
};

}  // namespace rtrx::sim
