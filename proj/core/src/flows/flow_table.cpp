#include "rtrx/flows/flow_table.hpp"

#include <stdexcept>

namespace rtrx::flows {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::udp: return "udp";
    case Protocol::tcp: return "tcp";
    case Protocol::arp: return "arp";
    case Protocol::icmp: return "icmp";
    case Protocol::other: return "other";
  }
  return "?";
}

std::optional<Protocol> protocol_from_string(const std::string& s) {
  if (s == "udp") return Protocol::udp;
  if (s == "tcp") return Protocol::tcp;
  if (s == "arp") return Protocol::arp;
  if (s == "icmp") return Protocol::icmp;
  if (s == "other") return Protocol::other;
  return std::nullopt;
}

const char* to_string(Disposition d) {
  switch (d) {
    case Disposition::none: return "pending";
    case Disposition::delivered: return "delivered";
    case Disposition::dropped_unregistered: return "dropped-unregistered";
    case Disposition::dropped_queue_full: return "dropped-queue-full";
    case Disposition::dropped_mitigated: return "dropped-mitigated";
    case Disposition::recycled: return "recycled";
    case Disposition::dropped_bd_starved: return "dropped-bd-starved";
  }
  return "?";
}

const char* to_string(IsrPath p) {
  switch (p) {
    case IsrPath::none: return "none";
    case IsrPath::regular: return "regular";
    case IsrPath::shortcircuit: return "shortcircuit";
    case IsrPath::mitigated: return "mitigating";
    case IsrPath::regular_recycle: return "recycling";
    case IsrPath::regular_prio_raise: return "prio+";
    case IsrPath::regular_recycle_prio_raise: return "recycling;prio+";
  }
  return "?";
}

void PacketRecord::set_stage(Stage s, SimTime t) {
  int idx = static_cast<int>(s);
  stage[idx] = t;
}

void PacketRecord::dispose(Disposition d) {
  if (disposition != Disposition::none) {
    throw std::logic_error("packet disposition set twice");
  }
  disposition = d;
}

int FlowTable::bind(FlowSpec spec) {
  if (spec.min_period <= 0) {
    throw std::invalid_argument("bind: flow period must be positive");
  }
  if (spec.proto == Protocol::other) {
    throw std::invalid_argument("bind: flows exist for ARP, ICMP, TCP, UDP only");
  }
  for (const FlowSpec& f : flows_) {
    bool conflict = false;
    if (spec.proto == Protocol::arp || spec.proto == Protocol::icmp) {
      conflict = f.proto == spec.proto;
    } else {
      conflict = f.proto == spec.proto && f.dst_port == spec.dst_port;
    }
    if (conflict) {
      throw std::invalid_argument("bind: conflicting registration for " +
                                  std::string(to_string(spec.proto)) + ":" +
                                  std::to_string(spec.dst_port));
    }
  }
  spec.flow_id = next_id_++;
  flows_.push_back(std::move(spec));
  return flows_.back().flow_id;
}

void FlowTable::unbind(int flow_id) {
  for (auto it = flows_.begin(); it != flows_.end(); ++it) {
    if (it->flow_id == flow_id) {
      flows_.erase(it);
      return;
    }
  }
  throw std::invalid_argument("unbind: unknown flow " + std::to_string(flow_id));
}

std::optional<int> FlowTable::classify(const PacketHeader& header) const {
  if (header.proto == Protocol::other) return std::nullopt;
  for (const FlowSpec& f : flows_) {
    if (header.proto == Protocol::arp || header.proto == Protocol::icmp) {
      if (f.proto == header.proto) return f.flow_id;
    } else if (f.proto == header.proto && f.dst_port == header.dst_port) {
      return f.flow_id;
    }
  }
  return std::nullopt;
}

const FlowSpec* FlowTable::find(int flow_id) const {
  for (const FlowSpec& f : flows_) {
    if (f.flow_id == flow_id) return &f;
  }
  return nullptr;
}

}  // namespace rtrx::flows
