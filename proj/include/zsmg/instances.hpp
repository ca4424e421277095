#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "zsmg/function_class.hpp"
#include "zsmg/game.hpp"

namespace zsmg {

// Rewards i.i.d. U[0,1], each zeroed with probability `reward_sparsity`;
// transition rows from a symmetric Dirichlet(1).
TabularMG gen_random_tabular(const Dims& dims, double reward_sparsity, std::uint64_t seed,
                             int initial_state = 0);

// r^h(x,a,b) = phi_h(x,a,b)^T theta_h and P_h(.|x,a,b) = sum_j phi_h(x,a,b)_j psi_{h,j}.
struct LinearMGSpec {
  int d = 1;
  std::vector<std::vector<std::vector<double>>> phi;      // [h][(x*A + a)*B + b][j]
  std::vector<std::vector<double>> theta;                 // [h][j]
  std::vector<std::vector<std::vector<double>>> anchors;  // [h][j][x']

  // Throws ValidationError unless phi rows and anchors are distributions and
  // every reward lands in [0, 1].
  void validate(const Dims& dims) const;
};

enum class LinearFeatures { kDirichlet, kOneHot };

// One-hot features need d = |X||A||B|. Throws std::invalid_argument when d is
// out of range.
std::pair<TabularMG, LinearMGSpec> gen_linear_mg(const Dims& dims, int d, std::uint64_t seed,
                                                 LinearFeatures features = LinearFeatures::kDirichlet,
                                                 int initial_state = 0);

// Tabular game induced by a linear spec.
TabularMG materialize_linear(const Dims& dims, const LinearMGSpec& spec, int initial_state = 0);

// Entries i.i.d. U[0, beta - 1].
QFunction random_qfunction(const Dims& dims, double beta, Rng& rng);

// Fixed 2-state learning benchmark: H = 2, |A| = |B| = 2, beta = 3, and a
// closure class of four members per layer built from three random seeds.
struct Benchmark {
  TabularMG mg;
  FunctionClass fc;
  CompletenessDefect defect;
};

inline constexpr std::uint64_t kBenchmarkGameSeed = 2024;
inline constexpr std::uint64_t kBenchmarkClassSeed = 7;

Benchmark make_benchmark(std::uint64_t game_seed = kBenchmarkGameSeed,
                         std::uint64_t class_seed = kBenchmarkClassSeed);

}  // namespace zsmg
