#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace geostorage {

/// Shortest decimal text that parses back to the same double.
inline std::string format_shortest(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// 17 significant digits, the fixed-width form used in CSV output.
inline std::string format_g17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline std::string format_bool(bool b) { return b ? "true" : "false"; }

}  // namespace geostorage
