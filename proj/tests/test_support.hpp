#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "zsmg/game.hpp"
#include "zsmg/instances.hpp"

namespace zsmg::testing {

inline MarkovPolicy random_policy(Side side, const Dims& dims, Rng& rng) {
  MarkovPolicy p(side, dims.horizon, dims.num_states, side == Side::kMax ? dims.num_a : dims.num_b);
  for (int h = 0; h < dims.horizon; ++h)
    for (int x = 0; x < dims.num_states; ++x) {
      auto row = p.row(h, x);
      double total = 0.0;
      for (double& v : row) {
        v = uniform01(rng) + 0.05;
        total += v;
      }
      for (double& v : row) v /= total;
    }
  return p;
}

// Uniformly random dimensions within the given caps.
inline Dims random_dims(Rng& rng, int max_h, int max_x, int max_a, int max_b) {
  auto pick = [&](int hi) { return 1 + static_cast<int>(uniform01(rng) * hi); };
  return {pick(max_h), pick(max_x), pick(max_a), pick(max_b)};
}

// Deterministic chain: state h at step h, every action pair moves to h+1.
inline TabularMG chain_game(int H, int num_a, int num_b) {
  const Dims d{H, H, num_a, num_b};
  std::vector<LayerTable> reward;
  std::vector<double> transition;
  for (int h = 0; h < H; ++h) {
    LayerTable r(d);
    for (int x = 0; x < H; ++x)
      for (int a = 0; a < num_a; ++a)
        for (int b = 0; b < num_b; ++b) {
          r(x, a, b) = 0.1 * (a + 1) / (b + 1);
          for (int y = 0; y < H; ++y) transition.push_back(y == std::min(h + 1, H - 1) ? 1.0 : 0.0);
        }
    reward.push_back(std::move(r));
  }
  return TabularMG(d, 0, std::move(reward), std::move(transition));
}

// Single-state, single-step game with the given payoff matrix.
inline TabularMG matrix_game(const std::vector<std::vector<double>>& m) {
  const int rows = static_cast<int>(m.size());
  const int cols = static_cast<int>(m[0].size());
  const Dims d{1, 1, rows, cols};
  LayerTable r(d);
  for (int a = 0; a < rows; ++a)
    for (int b = 0; b < cols; ++b) r(0, a, b) = m[a][b];
  return TabularMG(d, 0, {r}, std::vector<double>(rows * cols, 1.0));
}

// Enumerates every (x, a, b)-path from x^1 with its probability.
inline void for_each_path(
    const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu,
    const std::function<void(const std::vector<Step>&, double)>& visit) {
  const Dims& d = mg.dims();
  std::vector<Step> path(d.horizon);
  std::function<void(int, int, double)> rec = [&](int h, int x, double p) {
    if (p == 0.0) return;
    for (int a = 0; a < d.num_a; ++a)
      for (int b = 0; b < d.num_b; ++b) {
        const double pab = p * mu.prob(h, x, a) * nu.prob(h, x, b);
        path[h] = {x, a, b, mg.reward(h, x, a, b)};
        if (h + 1 == d.horizon) {
          visit(path, pab);
          continue;
        }
        const auto next = mg.next_state_dist(h, x, a, b);
        for (int y = 0; y < d.num_states; ++y) rec(h + 1, y, pab * next[y]);
      }
  };
  rec(0, mg.initial_state(), 1.0);
}

inline double max_abs_diff(const LayerTable& a, const LayerTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace zsmg::testing
