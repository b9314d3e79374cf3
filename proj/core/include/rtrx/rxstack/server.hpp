#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "rtrx/sim/time.hpp"

namespace rtrx::rxstack {

// Highest possible demand of a deferrable server with budget e and period p
// inside any window of length delta: e * (ceil(delta / p) + 1). The extra
// budget covers back-to-back execution across a period boundary.
inline std::int64_t server_demand_bound(std::int64_t e, SimDuration p,
                                        SimDuration delta) {
  if (e < 0 || delta < 0 || p <= 0) {
    throw std::invalid_argument("server_demand_bound: e >= 0, p > 0, delta >= 0");
  }
  return e * (ceil_div(delta, p) + 1);
}

// Packet-count deferrable server. The budget is restored to full capacity at
// every period boundary (periods are aligned to simulation start);
// replenishment is evaluated lazily, so no timer events are needed.
class DeferrableServer {
 public:
  DeferrableServer() = default;  // unbounded
  DeferrableServer(std::optional<std::uint64_t> capacity, SimDuration period)
      : capacity_(capacity), period_(period) {
    if (capacity_ && period_ <= 0) {
      throw std::invalid_argument("DeferrableServer: period must be positive");
    }
    remaining_ = capacity_ ? *capacity_ : 0;
  }

  bool unbounded() const { return !capacity_.has_value(); }

  bool try_debit(SimTime now) {
    if (unbounded()) return true;
    roll(now);
    if (remaining_ == 0) return false;
    --remaining_;
    return true;
  }

  std::uint64_t remaining(SimTime now) {
    if (unbounded()) return UINT64_MAX;
    roll(now);
    return remaining_;
  }

  std::uint64_t capacity() const { return capacity_ ? *capacity_ : UINT64_MAX; }
  SimDuration period() const { return period_; }

  SimTime next_boundary(SimTime now) const {
    return (now / period_ + 1) * period_;
  }

 private:
  void roll(SimTime now) {
    std::int64_t idx = now / period_;
    if (idx > period_index_) {
      period_index_ = idx;
      remaining_ = *capacity_;
    }
  }

  std::optional<std::uint64_t> capacity_;
  SimDuration period_ = kMsec;
  std::uint64_t remaining_ = 0;
  std::int64_t period_index_ = 0;
};

}  // namespace rtrx::rxstack
