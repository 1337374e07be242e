#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace neardgd {

// Shortest round-trip decimal form; locale-free, so serialized numbers are
// byte-stable across runs and parse back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_double: bad number '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("parse_int: bad integer '" + std::string(s) + "'");
  return v;
}

}  // namespace neardgd
