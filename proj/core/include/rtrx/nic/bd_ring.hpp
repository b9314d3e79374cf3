#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>

namespace rtrx::nic {

// Buffer-descriptor ring with a closed buffer pool shared between the NIC
// and the receive software. `free` counts NIC-owned descriptors ready for
// DMA; everything else is held by the CPU side (received but unconsumed
// descriptors, packets parked in flow queues, packets in processing). A
// packet arriving while free == 0 is dropped by the NIC without an
// interrupt.
class BdRing {
 public:
  explicit BdRing(int capacity) : capacity_(capacity), free_(capacity) {
    if (capacity < 1) throw std::invalid_argument("BdRing: capacity must be >= 1");
  }

  // NIC-side: DMA a packet into a free descriptor. False = starved.
  bool accept(std::uint32_t packet_id) {
    if (free_ == 0) return false;
    --free_;
    rx_fifo_.push_back(packet_id);
    return true;
  }

  // Driver-side: take the oldest received descriptor. The buffer stays with
  // the packet until release_buffer().
  std::optional<std::uint32_t> consume() {
    if (rx_fifo_.empty()) return std::nullopt;
    std::uint32_t id = rx_fifo_.front();
    rx_fifo_.pop_front();
    return id;
  }

  // Returns one buffer to the NIC (recycled drop or deferred-driver refill).
  void release_buffer() {
    if (free_ >= capacity_) throw std::logic_error("BdRing: over-release");
    ++free_;
  }

  int capacity() const { return capacity_; }
  int free_count() const { return free_; }
  int fill() const { return capacity_ - free_; }
  int pending() const { return static_cast<int>(rx_fifo_.size()); }

  // True when the free fraction is strictly below the threshold.
  bool below(double threshold) const {
    return static_cast<double>(free_) < threshold * static_cast<double>(capacity_);
  }

 private:
  int capacity_;
  int free_;
  std::deque<std::uint32_t> rx_fifo_;
};

}  // namespace rtrx::nic
