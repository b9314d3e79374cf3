#include "rtrx/rxstack/dfq.hpp"

namespace rtrx::rxstack {

void Dfq::insert(std::uint32_t packet_id, int flow_id, int priority) {
  by_prio_[priority][flow_id].push_back(packet_id);
  ++size_;
}

DfqEntry Dfq::pop_highest() {
  if (size_ == 0) throw std::logic_error("Dfq::pop_highest on empty structure");
  auto pit = std::prev(by_prio_.end());
  auto fit = pit->second.begin();
  DfqEntry e{fit->second.front(), fit->first, pit->first};
  fit->second.pop_front();
  if (fit->second.empty()) pit->second.erase(fit);
  if (pit->second.empty()) by_prio_.erase(pit);
  --size_;
  return e;
}

DfqEntry Dfq::recycle_lowest(bool drop_head) {
  if (size_ == 0) throw std::logic_error("Dfq::recycle_lowest on empty structure");
  auto pit = by_prio_.begin();
  auto fit = pit->second.begin();
  DfqEntry e{0, fit->first, pit->first};
  if (drop_head) {
    e.packet_id = fit->second.front();
    fit->second.pop_front();
  } else {
    e.packet_id = fit->second.back();
    fit->second.pop_back();
  }
  if (fit->second.empty()) pit->second.erase(fit);
  if (pit->second.empty()) by_prio_.erase(pit);
  --size_;
  return e;
}

std::optional<int> Dfq::highest_priority() const {
  if (size_ == 0) return std::nullopt;
  return std::prev(by_prio_.end())->first;
}

std::optional<int> Dfq::lowest_priority() const {
  if (size_ == 0) return std::nullopt;
  return by_prio_.begin()->first;
}

std::size_t Dfq::flow_depth(int flow_id, int priority) const {
  auto pit = by_prio_.find(priority);
  if (pit == by_prio_.end()) return 0;
  auto fit = pit->second.find(flow_id);
  if (fit == pit->second.end()) return 0;
  return fit->second.size();
}

}  // namespace rtrx::rxstack
