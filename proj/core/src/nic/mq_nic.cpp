#include "rtrx/nic/mq_nic.hpp"

#include <stdexcept>

namespace rtrx::nic {

std::uint64_t nic_memory_bytes(std::uint64_t queue_count) {
  return queue_count * 30 + 14;
}

void QueueConfig::validate() const {
  if (n_q < 1) throw std::invalid_argument("queue config: n_q must be >= 1");
  if (t_abs < 0 || t_pack < 0) {
    throw std::invalid_argument("queue config: negative timer");
  }
  if (counter_threshold < 0) {
    throw std::invalid_argument("queue config: negative counter threshold");
  }
  if (t_abs > 0 && t_pack > 0 && t_pack > t_abs) {
    throw std::invalid_argument("queue config: t_pack must be <= t_abs");
  }
}

void MqNic::configure(const QueueConfig& cfg) {
  cfg.validate();
  auto it = queues_.find(cfg.queue_id);
  if (it == queues_.end()) {
    Queue q;
    q.cfg = cfg;
    queues_.emplace(cfg.queue_id, std::move(q));
  } else {
    it->second.cfg = cfg;
  }
}

const QueueConfig& MqNic::config(int queue_id) const {
  auto it = queues_.find(queue_id);
  if (it == queues_.end()) throw std::invalid_argument("unknown queue");
  return it->second.cfg;
}

MqNic::Queue& MqNic::queue_at(int id) {
  auto it = queues_.find(id);
  if (it == queues_.end()) throw std::invalid_argument("unknown queue");
  return it->second;
}

void MqNic::map_port(flows::Protocol proto, std::uint16_t dst_port, int queue_id) {
  queue_at(queue_id);
  port_map_[{proto, dst_port}] = queue_id;
}

void MqNic::map_protocol(flows::Protocol proto, int queue_id) {
  queue_at(queue_id);
  proto_map_[proto] = queue_id;
}

void MqNic::unmap_port(flows::Protocol proto, std::uint16_t dst_port) {
  port_map_.erase({proto, dst_port});
}

void MqNic::release_queue(int queue_id) {
  Queue& q = queue_at(queue_id);
  if (!q.pending.empty()) fire(queue_id);
  for (auto it = port_map_.begin(); it != port_map_.end();) {
    it = it->second == queue_id ? port_map_.erase(it) : std::next(it);
  }
  for (auto it = proto_map_.begin(); it != proto_map_.end();) {
    it = it->second == queue_id ? proto_map_.erase(it) : std::next(it);
  }
  queues_.erase(queue_id);
}

void MqNic::arm_absolute(int queue_id) {
  Queue& q = queue_at(queue_id);
  if (q.cfg.t_abs <= 0) return;
  std::uint64_t gen = q.window_gen;
  engine_.schedule(engine_.now() + q.cfg.t_abs, sim::EventKind::timer,
                   [this, queue_id, gen] {
                     auto it = queues_.find(queue_id);
                     if (it == queues_.end()) return;
                     Queue& queue = it->second;
                     if (queue.window_gen != gen || queue.pending.empty()) return;
                     fire(queue_id);
                   });
}

void MqNic::arm_packet(int queue_id) {
  Queue& q = queue_at(queue_id);
  if (q.cfg.t_pack <= 0) return;
  std::uint64_t wgen = q.window_gen;
  std::uint64_t pgen = ++q.pack_gen;
  engine_.schedule(engine_.now() + q.cfg.t_pack, sim::EventKind::timer,
                   [this, queue_id, wgen, pgen] {
                     auto it = queues_.find(queue_id);
                     if (it == queues_.end()) return;
                     Queue& queue = it->second;
                     if (queue.window_gen != wgen || queue.pack_gen != pgen ||
                         queue.pending.empty()) {
                       return;
                     }
                     fire(queue_id);
                   });
}

MqRxResult MqNic::rx(std::uint32_t packet_id, const flows::PacketHeader& header,
                     int* queue_out) {
  int queue_id = -1;
  auto pit = port_map_.find({header.proto, header.dst_port});
  if (pit != port_map_.end()) {
    queue_id = pit->second;
  } else {
    auto prit = proto_map_.find(header.proto);
    if (prit != proto_map_.end()) queue_id = prit->second;
  }
  if (queue_id < 0) return MqRxResult::dropped_unregistered;
  if (queue_out != nullptr) *queue_out = queue_id;

  Queue& q = queue_at(queue_id);
  if (static_cast<int>(q.pending.size()) >= q.cfg.n_q) {
    return MqRxResult::dropped_queue_full;
  }
  bool first_of_window = q.pending.empty();
  q.pending.push_back(packet_id);
  q.packet_count++;
  if (q.cfg.counter_threshold > 0 &&
      static_cast<int>(q.pending.size()) >= q.cfg.counter_threshold) {
    fire(queue_id);
    return MqRxResult::enqueued;
  }
  // Unmoderated queue: every packet is announced immediately, matching the
  // baseline one-interrupt-per-packet behavior.
  if (q.cfg.t_abs <= 0 && q.cfg.t_pack <= 0 && q.cfg.counter_threshold <= 0) {
    fire(queue_id);
    return MqRxResult::enqueued;
  }
  if (first_of_window) arm_absolute(queue_id);
  arm_packet(queue_id);
  return MqRxResult::enqueued;
}

void MqNic::fire(int queue_id) {
  Queue& q = queue_at(queue_id);
  std::vector<std::uint32_t> batch;
  batch.swap(q.pending);
  q.window_gen++;  // disarms both timers, resets the counter
  q.fire_count++;
  // Double buffering: the queue is immediately ready to fill again; the
  // departing batch is handed over in one interrupt.
  on_batch_(queue_id, batch);
}

std::uint64_t MqNic::fires(int queue_id) const {
  auto it = queues_.find(queue_id);
  return it == queues_.end() ? 0 : it->second.fire_count;
}

std::uint64_t MqNic::packets(int queue_id) const {
  auto it = queues_.find(queue_id);
  return it == queues_.end() ? 0 : it->second.packet_count;
}

int MqNic::pending(int queue_id) const {
  auto it = queues_.find(queue_id);
  return it == queues_.end() ? 0 : static_cast<int>(it->second.pending.size());
}

std::vector<int> MqNic::queue_ids() const {
  std::vector<int> ids;
  for (const auto& [id, q] : queues_) ids.push_back(id);
  return ids;
}

}  // namespace rtrx::nic
