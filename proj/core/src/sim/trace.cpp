#include "rtrx/sim/trace.hpp"

#include <ostream>

namespace rtrx::sim {

const char* to_string(CpuEventKind kind) {
  switch (kind) {
    case CpuEventKind::task_start: return "task-start";
    case CpuEventKind::task_preempt: return "task-preempt";
    case CpuEventKind::task_resume: return "task-resume";
    case CpuEventKind::task_end: return "task-end";
    case CpuEventKind::isr_enter: return "isr-enter";
    case CpuEventKind::isr_exit: return "isr-exit";
    case CpuEventKind::mode_switch: return "mode-switch";
  }
  return "?";
}

std::uint16_t SimTrace::intern_task(const std::string& name) {
  tasks_.push_back(name);
  return static_cast<std::uint16_t>(tasks_.size() - 1);
}

std::uint16_t SimTrace::intern_vector(const std::string& name) {
  vectors_.push_back(name);
  return static_cast<std::uint16_t>(vectors_.size() - 1);
}

const std::string& SimTrace::subject_name(const CpuEvent& ev) const {
  static const std::string kSystem = "sim";
  switch (ev.subject_kind) {
    case SubjectKind::task: return tasks_[ev.subject];
    case SubjectKind::irq_vector: return vectors_[ev.subject];
    case SubjectKind::system: return kSystem;
  }
  return kSystem;
}

void SimTrace::write_csv(std::ostream& out) const {
  out << "time_ns,kind,subject,detail\n";
  for (const CpuEvent& ev : events_) {
    out << ev.time << ',' << to_string(ev.kind) << ',' << subject_name(ev)
        << ',' << ev.detail << '\n';
  }
}

bool SimTrace::operator==(const SimTrace& other) const {
  if (events_.size() != other.events_.size()) return false;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const CpuEvent& a = events_[i];
    const CpuEvent& b = other.events_[i];
    if (a.time != b.time || a.kind != b.kind ||
        a.subject_kind != b.subject_kind || a.subject != b.subject ||
        a.detail != b.detail) {
      return false;
    }
    if (subject_name(a) != other.subject_name(b)) return false;
  }
  return true;
}

}  // namespace rtrx::sim
