#pragma once

#include <cstdio>
#include <string>

namespace spt {

/// 17 significant digits: enough for an exact double round trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace spt
