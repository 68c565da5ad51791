#include "rtmw/time.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <cstdlib>
#include <numeric>

#include "rtmw/error.hpp"

namespace rtmw {

Nanos parse_duration(std::string_view text) {
  std::string_view digits = text;
  std::size_t pos = 0;
  while (pos < digits.size() && (std::isdigit(static_cast<unsigned char>(digits[pos])) != 0)) ++pos;
  if (pos == 0) throw DocumentError("invalid duration '" + std::string(text) + "'");
  Nanos value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + pos, value);
  if (ec != std::errc{}) throw DocumentError("invalid duration '" + std::string(text) + "'");
  std::string_view unit = digits.substr(pos);
  Nanos scale = 1;
  if (unit.empty() || unit == "ns") {
    scale = 1;
  } else if (unit == "us") {
    scale = kMicro;
  } else if (unit == "ms") {
    scale = kMilli;
  } else if (unit == "s") {
    scale = kSecond;
  } else {
    throw DocumentError("unknown duration unit in '" + std::string(text) + "'");
  }
  if (value > std::numeric_limits<Nanos>::max() / scale) {
    throw DocumentError("duration overflows: '" + std::string(text) + "'");
  }
  return value * scale;
}

std::string format_duration(Nanos ns) {
  if (ns != 0) {
    if (ns % kSecond == 0) return std::to_string(ns / kSecond) + "s";
    if (ns % kMilli == 0) return std::to_string(ns / kMilli) + "ms";
    if (ns % kMicro == 0) return std::to_string(ns / kMicro) + "us";
  }
  return std::to_string(ns) + "ns";
}

Nanos gcd_ns(Nanos a, Nanos b) { return std::gcd(a, b); }

bool lcm_ns(Nanos a, Nanos b, Nanos& out) {
  if (a == 0 || b == 0) {
    out = 0;
    return true;
  }
  Nanos g = std::gcd(a, b);
  Nanos q = a / g;
  if (q > std::numeric_limits<Nanos>::max() / b) return false;
  out = q * b;
  return true;
}

}  // namespace rtmw
