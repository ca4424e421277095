#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace zsmg {

// Input failed a model invariant (probabilities, bounds, sizes).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two objects that must agree on (H, |X|, |A|, |B|) do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kProbTolerance = 1e-12;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits, so draws do not depend
// on the standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index drawn from an unnormalized non-negative weight vector by inverse CDF.
template <typename Range>
std::size_t draw_index(const Range& weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  std::size_t i = 0;
  for (double w : weights) {
    if (w > 0.0) {
      acc += w;
      last_positive = i;
      if (u < acc) return i;
    }
    ++i;
  }
  return last_positive;
}

// "%.12g", the fixed float format of every CSV column.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace zsmg
