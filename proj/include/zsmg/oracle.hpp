#pragma once

#include <vector>

#include "zsmg/game.hpp"
#include "zsmg/matrix_game.hpp"

namespace zsmg {

// Ground truth for a game: Q*, V*, and one Nash pair.
struct NashSolution {
  std::vector<LayerTable> q_star;  // [h]
  ValueTable v_star;               // [h][x], h = 0 .. H (terminal row is zero)
  MarkovPolicy mu_star;
  MarkovPolicy nu_star;

  double value() const { return v_star[0][initial_state]; }
  int initial_state = 0;
};

// Response of one player against a fixed opponent policy.
struct BestResponseSolution {
  std::vector<LayerTable> q_br;  // Q^{mu,dagger}_h (or Q^{dagger,nu}_h)
  ValueTable v_br;               // [h][x], terminal row zero
  MarkovPolicy response;         // deterministic, lowest index on ties
  int initial_state = 0;

  double value() const { return v_br[0][initial_state]; }
};

NashSolution solve_nash(const TabularMG& mg);

// Min-player best response to a max-player policy mu.
// Throws DimensionError when mu is a min-player policy.
BestResponseSolution best_response(const TabularMG& mg, const MarkovPolicy& mu);

// Max-player best response to a min-player policy nu.
BestResponseSolution best_response_to_min(const TabularMG& mg, const MarkovPolicy& nu);

// Matrix-game value of every state block of a layer.
std::vector<double> nash_values(const LayerTable& layer);

// min_b sum_a mu_h(a|x) layer(x, a, b) for every x, with mu taken at step h.
std::vector<double> min_values(const LayerTable& layer, const MarkovPolicy& mu, int h);

// (T_h f)(x,a,b) = r^h + P_h V_{f,h+1}. At the last step f_next is ignored
// (the terminal layer is identically zero).
LayerTable bellman_apply(const TabularMG& mg, const LayerTable& f_next, int h);

// (T^mu_h f)(x,a,b) = r^h + P_h V^mu_{f,h+1}; V^mu uses mu at step h+1.
LayerTable bellman_apply_mu(const TabularMG& mg, const LayerTable& f_next,
                            const MarkovPolicy& mu, int h);

inline MatrixView state_matrix(const LayerTable& layer, int x) {
  return {layer.state_block(x), layer.num_a(), layer.num_b()};
}

}  // namespace zsmg
