#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace ihw {

// Shortest text that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace ihw
