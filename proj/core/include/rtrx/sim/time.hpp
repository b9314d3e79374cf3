#pragma once

#include <cmath>
#include <cstdint>

namespace rtrx {

// All simulation time is integer nanoseconds since simulation start.
// Microsecond/millisecond inputs convert exactly, so event ordering never
// depends on floating point.
using SimTime = std::int64_t;
using SimDuration = std::int64_t;

inline constexpr SimTime kUsec = 1'000;
inline constexpr SimTime kMsec = 1'000'000;
inline constexpr SimTime kSec = 1'000'000'000;

inline SimDuration duration_us(double us) {
  return static_cast<SimDuration>(std::llround(us * 1e3));
}

inline SimDuration duration_ms(double ms) {
  return static_cast<SimDuration>(std::llround(ms * 1e6));
}

inline double to_us(SimTime t) { return static_cast<double>(t) / 1e3; }
inline double to_ms(SimTime t) { return static_cast<double>(t) / 1e6; }

// ceil(a / b) for non-negative a, positive b.
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return (a + b - 1) / b;
}

}  // namespace rtrx
