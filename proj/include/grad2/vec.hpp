#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grad2/errors.hpp"

namespace grad2 {

using Vec = std::vector<double>;
using ConstVecView = std::span<const double>;

inline double dot(ConstVecView a, ConstVecView b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(ConstVecView a) { return dot(a, a); }
inline double norm(ConstVecView a) { return std::sqrt(norm_sq(a)); }

inline Vec sub(ConstVecView a, ConstVecView b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(ConstVecView a, ConstVecView b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

// a + s*b
inline Vec axpy(ConstVecView a, double s, ConstVecView b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
  return r;
}

inline bool all_finite(ConstVecView a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

inline void require_dimension(ConstVecView v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw InputError(std::string(what) + ": expected dimension " + std::to_string(n) +
                     ", got " + std::to_string(v.size()));
}

// Closed interval on one axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

using Box = std::vector<Interval>;

}  // namespace grad2
