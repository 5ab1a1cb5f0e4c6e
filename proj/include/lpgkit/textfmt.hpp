#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace lpgkit {

/// Shortest round-trip decimal rendering; every CSV and JSON number the kit
/// writes goes through here so repeat runs stay byte-identical.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace lpgkit
