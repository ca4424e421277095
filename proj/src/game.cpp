#include "zsmg/game.hpp"

#include <cmath>
#include <string>

namespace zsmg {

namespace {

std::string at(int h, int x, int a, int b) {
  return "(h=" + std::to_string(h) + ", x=" + std::to_string(x) +
         ", a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")";
}

void check_distribution(std::span<const double> p, const std::string& where) {
  double total = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0)
      throw ValidationError("negative or non-finite probability at " + where);
    total += v;
  }
  if (std::abs(total - 1.0) > kProbTolerance)
    throw ValidationError("probabilities do not sum to 1 at " + where);
}

}  // namespace

TabularMG::TabularMG(Dims dims, int initial_state, std::vector<LayerTable> reward,
                     std::vector<double> transition)
    : dims_(dims), initial_state_(initial_state), reward_(std::move(reward)),
      transition_(std::move(transition)) {
  if (dims_.horizon < 1 || dims_.num_states < 1 || dims_.num_a < 1 || dims_.num_b < 1)
    throw ValidationError("game dimensions must be positive");
  if (initial_state_ < 0 || initial_state_ >= dims_.num_states)
    throw ValidationError("initial_state out of range");
  if (static_cast<int>(reward_.size()) != dims_.horizon)
    throw ValidationError("reward must have one layer per step");
  const std::size_t expected = static_cast<std::size_t>(dims_.horizon) * dims_.cells() *
                               dims_.num_states;
  if (transition_.size() != expected)
    throw ValidationError("transition table has the wrong size");

  for (int h = 0; h < dims_.horizon; ++h) {
    const LayerTable& r = reward_[h];
    if (r.num_states() != dims_.num_states || r.num_a() != dims_.num_a ||
        r.num_b() != dims_.num_b)
      throw ValidationError("reward layer has the wrong shape");
    for (int x = 0; x < dims_.num_states; ++x)
      for (int a = 0; a < dims_.num_a; ++a)
        for (int b = 0; b < dims_.num_b; ++b) {
          const double v = r(x, a, b);
          if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw ValidationError("reward outside [0,1] at " + at(h, x, a, b));
          check_distribution(next_state_dist(h, x, a, b), at(h, x, a, b));
        }
  }
}

LayerTable TabularMG::backup(int h, std::span<const double> next_values) const {
  LayerTable out = reward_[h];
  for (int x = 0; x < dims_.num_states; ++x)
    for (int a = 0; a < dims_.num_a; ++a)
      for (int b = 0; b < dims_.num_b; ++b) {
        const auto p = next_state_dist(h, x, a, b);
        double ev = 0.0;
        for (int y = 0; y < dims_.num_states; ++y) ev += p[y] * next_values[y];
        out(x, a, b) += ev;
      }
  return out;
}

MarkovPolicy::MarkovPolicy(Side side, int horizon, int num_states, int num_actions)
    : side_(side), horizon_(horizon), num_states_(num_states), num_actions_(num_actions),
      probs_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

MarkovPolicy MarkovPolicy::uniform(Side side, const Dims& dims) {
  const int n = side == Side::kMax ? dims.num_a : dims.num_b;
  MarkovPolicy p(side, dims.horizon, dims.num_states, n);
  for (double& v : p.probs_) v = 1.0 / n;
  return p;
}

void MarkovPolicy::set_pure(int h, int x, int action) {
  auto r = row(h, x);
  for (double& v : r) v = 0.0;
  r[action] = 1.0;
}

void MarkovPolicy::validate() const {
  for (int h = 0; h < horizon_; ++h)
    for (int x = 0; x < num_states_; ++x)
      check_distribution(row(h, x),
                         "policy row (h=" + std::to_string(h) + ", x=" + std::to_string(x) + ")");
}

void MarkovPolicy::check_dims(const Dims& dims) const {
  const int n = side_ == Side::kMax ? dims.num_a : dims.num_b;
  if (horizon_ != dims.horizon || num_states_ != dims.num_states || num_actions_ != n)
    throw DimensionError("policy dimensions do not match the game");
}

double OccupancyMeasure::expect(int h, const LayerTable& table) const {
  const auto& d = dist[h].data();
  const auto& t = table.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += d[i] * t[i];
  return acc;
}

namespace {

void check_pair(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu) {
  if (mu.side() != Side::kMax || nu.side() != Side::kMin)
    throw DimensionError("expected (max-player, min-player) policies");
  mu.check_dims(mg.dims());
  nu.check_dims(mg.dims());
}

}  // namespace

Trajectory sample_episode(const TabularMG& mg, const MarkovPolicy& mu,
                          const MarkovPolicy& nu, Rng& rng, int episode) {
  check_pair(mg, mu, nu);
  Trajectory traj;
  traj.episode = episode;
  traj.steps.reserve(mg.horizon());
  int x = mg.initial_state();
  for (int h = 0; h < mg.horizon(); ++h) {
    const int a = static_cast<int>(draw_index(mu.row(h, x), rng));
    const int b = static_cast<int>(draw_index(nu.row(h, x), rng));
    traj.steps.push_back({x, a, b, mg.reward(h, x, a, b)});
    if (h + 1 < mg.horizon()) x = static_cast<int>(draw_index(mg.next_state_dist(h, x, a, b), rng));
  }
  return traj;
}

OccupancyMeasure compute_occupancy(const TabularMG& mg, const MarkovPolicy& mu,
                                   const MarkovPolicy& nu) {
  check_pair(mg, mu, nu);
  const Dims& d = mg.dims();
  OccupancyMeasure occ;
  occ.dist.assign(d.horizon, LayerTable(d));
  std::vector<double> state_mass(d.num_states, 0.0);
  state_mass[mg.initial_state()] = 1.0;
  for (int h = 0; h < d.horizon; ++h) {
    std::vector<double> next(d.num_states, 0.0);
    LayerTable& layer = occ.dist[h];
    for (int x = 0; x < d.num_states; ++x) {
      if (state_mass[x] == 0.0) continue;
      for (int a = 0; a < d.num_a; ++a)
        for (int b = 0; b < d.num_b; ++b) {
          const double m = state_mass[x] * mu.prob(h, x, a) * nu.prob(h, x, b);
          layer(x, a, b) = m;
          if (h + 1 < d.horizon && m != 0.0) {
            const auto p = mg.next_state_dist(h, x, a, b);
            for (int y = 0; y < d.num_states; ++y) next[y] += m * p[y];
          }
        }
    }
    state_mass = std::move(next);
  }
  return occ;
}

double bilinear(std::span<const double> block, std::span<const double> row_probs,
                std::span<const double> col_probs) {
  const std::size_t nb = col_probs.size();
  double acc = 0.0;
  for (std::size_t a = 0; a < row_probs.size(); ++a) {
    if (row_probs[a] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t b = 0; b < nb; ++b) inner += block[a * nb + b] * col_probs[b];
    acc += row_probs[a] * inner;
  }
  return acc;
}

ValueTable policy_value(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu,
                        std::vector<LayerTable>* q_out) {
  check_pair(mg, mu, nu);
  const Dims& d = mg.dims();
  ValueTable v(d.horizon + 1, std::vector<double>(d.num_states, 0.0));
  if (q_out) q_out->assign(d.horizon, LayerTable(d));
  for (int h = d.horizon - 1; h >= 0; --h) {
    LayerTable q = mg.backup(h, v[h + 1]);
    for (int x = 0; x < d.num_states; ++x)
      v[h][x] = bilinear(q.state_block(x), mu.row(h, x), nu.row(h, x));
    if (q_out) (*q_out)[h] = std::move(q);
  }
  return v;
}

ValueTable policy_value(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu) {
  return policy_value(mg, mu, nu, nullptr);
}

}  // namespace zsmg
