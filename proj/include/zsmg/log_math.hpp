#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace zsmg {

// log(sum_i exp(args[i])); -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> args) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : args) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (double v : args) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(b)) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace zsmg
