#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace lpshrink {

/// Shortest decimal representation that parses back to the same double.
/// Locale-independent, so emitted CSV/JSON is byte-stable across runs.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace lpshrink
