#include "zsmg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zsmg {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr double kFeasTol = 1e-9;

void clamp_and_normalize(std::vector<double>& p) {
  double total = 0.0;
  for (double& v : p) {
    if (v < 0.0) v = 0.0;
    total += v;
  }
  for (double& v : p) v /= total;
}

}  // namespace

MatrixGameSolution solve_matrix_game(MatrixView m) {
  if (m.rows < 1 || m.cols < 1 ||
      m.data.size() != static_cast<std::size_t>(m.rows) * m.cols)
    throw std::invalid_argument("matrix game needs a non-empty m x n matrix");
  double lo = std::numeric_limits<double>::infinity();
  for (double v : m.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("matrix game entries must be finite");
    lo = std::min(lo, v);
  }

  // Shift so every entry is >= 1; then solve max 1^T w s.t. M' w <= 1, w >= 0.
  // Column strategy is w / 1^T w, row strategy comes from the slack duals.
  const int rows = m.rows;
  const int cols = m.cols;
  const int width = cols + rows;
  const double shift = 1.0 - lo;
  std::vector<std::vector<double>> tab(rows, std::vector<double>(width + 1, 0.0));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) tab[i][j] = m(i, j) + shift;
    tab[i][cols + i] = 1.0;
    tab[i][width] = 1.0;
  }
  std::vector<double> obj(width + 1, 0.0);
  for (int j = 0; j < cols; ++j) obj[j] = -1.0;
  std::vector<int> basis(rows);
  for (int i = 0; i < rows; ++i) basis[i] = cols + i;

  for (;;) {
    int enter = -1;
    for (int j = 0; j < width; ++j)
      if (obj[j] < -kPivotTol) {
        enter = j;
        break;
      }
    if (enter < 0) break;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows; ++i) {
      if (tab[i][enter] <= kPivotTol) continue;
      const double ratio = tab[i][width] / tab[i][enter];
      if (leave < 0 || ratio < best_ratio - kPivotTol) {
        leave = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + kPivotTol && basis[i] < basis[leave]) {
        // Bland: among tied rows, the smallest basic variable leaves.
        leave = i;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    // The feasible region is bounded (M' > 0), so a leaving row always exists.
    if (leave < 0) throw std::logic_error("unbounded matrix-game LP");

    const double piv = tab[leave][enter];
    for (double& v : tab[leave]) v /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == leave) continue;
      const double f = tab[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j <= width; ++j) tab[i][j] -= f * tab[leave][j];
    }
    const double f = obj[enter];
    for (int j = 0; j <= width; ++j) obj[j] -= f * tab[leave][j];
    basis[leave] = enter;
  }

  MatrixGameSolution sol;
  sol.col_strategy.assign(cols, 0.0);
  for (int i = 0; i < rows; ++i)
    if (basis[i] < cols) sol.col_strategy[basis[i]] = std::max(0.0, tab[i][width]);
  sol.row_strategy.assign(rows, 0.0);
  for (int i = 0; i < rows; ++i) sol.row_strategy[i] = obj[cols + i];
  clamp_and_normalize(sol.col_strategy);
  clamp_and_normalize(sol.row_strategy);

  const auto [lower, upper] = security_levels(m, sol.row_strategy, sol.col_strategy);
  double v = 0.0;
  for (int i = 0; i < rows; ++i) {
    if (sol.row_strategy[i] == 0.0) continue;
    double inner = 0.0;
    for (int j = 0; j < cols; ++j) inner += m(i, j) * sol.col_strategy[j];
    v += sol.row_strategy[i] * inner;
  }
  sol.value = std::clamp(v, lower, upper);
  sol.gap = upper - lower;
  if (sol.gap > kFeasTol * 10)
    throw std::logic_error("matrix-game solver failed to certify the value");
  return sol;
}

std::pair<double, int> best_pure_response_value(MatrixView m,
                                                std::span<const double> row_strategy) {
  if (static_cast<int>(row_strategy.size()) != m.rows)
    throw std::invalid_argument("row strategy length does not match the matrix");
  double best = std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int j = 0; j < m.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.rows; ++i) s += row_strategy[i] * m(i, j);
    if (s < best) {
      best = s;
      arg = j;
    }
  }
  return {best, arg};
}

std::pair<double, double> security_levels(MatrixView m, std::span<const double> row_strategy,
                                          std::span<const double> col_strategy) {
  double lower = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < m.rows; ++i) s += row_strategy[i] * m(i, j);
    lower = std::min(lower, s);
  }
  double upper = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * col_strategy[j];
    upper = std::max(upper, s);
  }
  return {lower, upper};
}

}  // namespace zsmg
