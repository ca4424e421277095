#include "zsmg/oracle.hpp"

#include <algorithm>

namespace zsmg {

std::vector<double> nash_values(const LayerTable& layer) {
  std::vector<double> v(layer.num_states());
  for (int x = 0; x < layer.num_states(); ++x)
    v[x] = solve_matrix_game(state_matrix(layer, x)).value;
  return v;
}

std::vector<double> min_values(const LayerTable& layer, const MarkovPolicy& mu, int h) {
  std::vector<double> v(layer.num_states());
  for (int x = 0; x < layer.num_states(); ++x)
    v[x] = best_pure_response_value(state_matrix(layer, x), mu.row(h, x)).first;
  return v;
}

NashSolution solve_nash(const TabularMG& mg) {
  const Dims& d = mg.dims();
  NashSolution sol;
  sol.initial_state = mg.initial_state();
  sol.q_star.resize(d.horizon);
  sol.v_star.assign(d.horizon + 1, std::vector<double>(d.num_states, 0.0));
  sol.mu_star = MarkovPolicy(Side::kMax, d.horizon, d.num_states, d.num_a);
  sol.nu_star = MarkovPolicy(Side::kMin, d.horizon, d.num_states, d.num_b);
  for (int h = d.horizon - 1; h >= 0; --h) {
    sol.q_star[h] = mg.backup(h, sol.v_star[h + 1]);
    for (int x = 0; x < d.num_states; ++x) {
      const MatrixGameSolution g = solve_matrix_game(state_matrix(sol.q_star[h], x));
      sol.v_star[h][x] = g.value;
      std::copy(g.row_strategy.begin(), g.row_strategy.end(), sol.mu_star.row(h, x).begin());
      std::copy(g.col_strategy.begin(), g.col_strategy.end(), sol.nu_star.row(h, x).begin());
    }
  }
  return sol;
}

BestResponseSolution best_response(const TabularMG& mg, const MarkovPolicy& mu) {
  if (mu.side() != Side::kMax) throw DimensionError("best_response expects a max-player policy");
  mu.check_dims(mg.dims());
  const Dims& d = mg.dims();
  BestResponseSolution sol;
  sol.initial_state = mg.initial_state();
  sol.q_br.resize(d.horizon);
  sol.v_br.assign(d.horizon + 1, std::vector<double>(d.num_states, 0.0));
  sol.response = MarkovPolicy(Side::kMin, d.horizon, d.num_states, d.num_b);
  for (int h = d.horizon - 1; h >= 0; --h) {
    sol.q_br[h] = mg.backup(h, sol.v_br[h + 1]);
    for (int x = 0; x < d.num_states; ++x) {
      const auto [v, b] = best_pure_response_value(state_matrix(sol.q_br[h], x), mu.row(h, x));
      sol.v_br[h][x] = v;
      sol.response.set_pure(h, x, b);
    }
  }
  return sol;
}

BestResponseSolution best_response_to_min(const TabularMG& mg, const MarkovPolicy& nu) {
  if (nu.side() != Side::kMin)
    throw DimensionError("best_response_to_min expects a min-player policy");
  nu.check_dims(mg.dims());
  const Dims& d = mg.dims();
  BestResponseSolution sol;
  sol.initial_state = mg.initial_state();
  sol.q_br.resize(d.horizon);
  sol.v_br.assign(d.horizon + 1, std::vector<double>(d.num_states, 0.0));
  sol.response = MarkovPolicy(Side::kMax, d.horizon, d.num_states, d.num_a);
  for (int h = d.horizon - 1; h >= 0; --h) {
    sol.q_br[h] = mg.backup(h, sol.v_br[h + 1]);
    const LayerTable& q = sol.q_br[h];
    for (int x = 0; x < d.num_states; ++x) {
      double best = -kInf;
      int arg = 0;
      for (int a = 0; a < d.num_a; ++a) {
        double s = 0.0;
        for (int b = 0; b < d.num_b; ++b) s += q(x, a, b) * nu.prob(h, x, b);
        if (s > best) {
          best = s;
          arg = a;
        }
      }
      sol.v_br[h][x] = best;
      sol.response.set_pure(h, x, arg);
    }
  }
  return sol;
}

LayerTable bellman_apply(const TabularMG& mg, const LayerTable& f_next, int h) {
  if (h + 1 >= mg.horizon()) return mg.reward(h);
  return mg.backup(h, nash_values(f_next));
}

LayerTable bellman_apply_mu(const TabularMG& mg, const LayerTable& f_next,
                            const MarkovPolicy& mu, int h) {
  if (h + 1 >= mg.horizon()) return mg.reward(h);
  return mg.backup(h, min_values(f_next, mu, h + 1));
}

}  // namespace zsmg
