#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace rtmw {

// All durations and instants are integral nanoseconds. Instants are measured
// from the start() of the current schedule.
using Duration = std::chrono::nanoseconds;
using Nanos = std::int64_t;

constexpr Nanos kMicro = 1'000;
constexpr Nanos kMilli = 1'000'000;
constexpr Nanos kSecond = 1'000'000'000;

// Accepts "250", "250ns", "10us", "4ms", "30s". Throws DocumentError.
Nanos parse_duration(std::string_view text);

// Shortest exact rendering, e.g. 4000000 -> "4ms".
std::string format_duration(Nanos ns);

// gcd/lcm over non-negative values; lcm returns false on int64 overflow.
Nanos gcd_ns(Nanos a, Nanos b);
bool lcm_ns(Nanos a, Nanos b, Nanos& out);

}  // namespace rtmw
