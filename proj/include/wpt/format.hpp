#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace wpt {

// Shortest round-trip decimal form; locale-independent, so text outputs are
// byte-stable across runs.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace wpt
