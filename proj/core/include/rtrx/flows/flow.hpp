#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rtrx/sim/time.hpp"

namespace rtrx::flows {

enum class Protocol : std::uint8_t { udp, tcp, arp, icmp, other };

const char* to_string(Protocol p);
std::optional<Protocol> protocol_from_string(const std::string& s);

// Wire-level identity of a packet as far as this model cares: protocol,
// destination port, and the (opaque) source token.
struct PacketHeader {
  Protocol proto = Protocol::udp;
  std::uint16_t dst_port = 0;
  std::uint32_t src = 0;
};

// An IP flow: (Src, Dst_port, P, t_P) plus the per-flow scheduling policy of
// its deferrable server. The source token is metadata only; classification
// matches local port and protocol, never the source.
struct FlowSpec {
  int flow_id = -1;
  std::string name;
  std::uint32_t src = 0;
  Protocol proto = Protocol::udp;
  std::uint16_t dst_port = 0;
  int priority = 0;
  SimDuration min_period = 1;  // t_P, > 0
  // Deferrable-server policy: packets per period. nullopt = unbounded.
  std::optional<std::uint64_t> server_capacity;
  SimDuration server_period = kMsec;
  // Hardware/unified modes: the NIC queue this flow maps to (-1 = none).
  int queue_id = -1;
};

}  // namespace rtrx::flows
