#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace gibbslab {

using Point = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace gibbslab
