#pragma once

#include <cstdio>
#include <string>

namespace gibbslab {

// 17 significant digits: enough for exact double round-trips.
inline std::string format17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string json_escape(const std::string& s);

// temp file + rename so readers never observe partial output
void atomic_write(const std::string& path, const std::string& content);

}  // namespace gibbslab
