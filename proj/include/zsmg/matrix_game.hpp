#pragma once

#include <span>
#include <utility>
#include <vector>

namespace zsmg {

// Non-owning row-major view of an m x n payoff matrix (row player maximizes).
struct MatrixView {
  std::span<const double> data;
  int rows = 0;
  int cols = 0;

  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
};

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;  // max-player
  std::vector<double> col_strategy;  // min-player
  // max_i (M q)_i - min_j (p^T M)_j for the returned pair.
  double gap = 0.0;
};

// Maximin value and an optimal strategy pair via the simplex method on the
// standard LP (Bland's rule, so the result is a deterministic function of M).
// Throws std::invalid_argument on empty or non-finite input.
MatrixGameSolution solve_matrix_game(MatrixView m);

inline MatrixGameSolution solve_matrix_game(const std::vector<double>& data, int rows,
                                            int cols) {
  return solve_matrix_game(MatrixView{data, rows, cols});
}

// min_j (p^T M)_j and the smallest minimizing column.
std::pair<double, int> best_pure_response_value(MatrixView m,
                                                std::span<const double> row_strategy);

// Security levels of a strategy pair: (min_j (p^T M)_j, max_i (M q)_i).
std::pair<double, double> security_levels(MatrixView m, std::span<const double> row_strategy,
                                          std::span<const double> col_strategy);

}  // namespace zsmg
