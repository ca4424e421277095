#pragma once

#include <span>
#include <vector>

#include "zsmg/common.hpp"

namespace zsmg {

// Sizes shared by a game and everything defined over it.
struct Dims {
  int horizon = 1;
  int num_states = 1;
  int num_a = 1;
  int num_b = 1;

  int cells() const { return num_states * num_a * num_b; }
  bool operator==(const Dims&) const = default;
};

// Dense table over (x, a, b) for one step: rewards, Q layers, residuals.
class LayerTable {
 public:
  LayerTable() = default;
  LayerTable(int num_states, int num_a, int num_b, double fill = 0.0)
      : num_states_(num_states), num_a_(num_a), num_b_(num_b),
        data_(static_cast<std::size_t>(num_states) * num_a * num_b, fill) {}
  explicit LayerTable(const Dims& d, double fill = 0.0)
      : LayerTable(d.num_states, d.num_a, d.num_b, fill) {}

  int num_states() const { return num_states_; }
  int num_a() const { return num_a_; }
  int num_b() const { return num_b_; }

  double& operator()(int x, int a, int b) { return data_[index(x, a, b)]; }
  double operator()(int x, int a, int b) const { return data_[index(x, a, b)]; }

  // Row-major |A| x |B| block of state x.
  std::span<const double> state_block(int x) const {
    return {data_.data() + static_cast<std::size_t>(x) * num_a_ * num_b_,
            static_cast<std::size_t>(num_a_) * num_b_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const LayerTable&) const = default;

 private:
  std::size_t index(int x, int a, int b) const {
    return (static_cast<std::size_t>(x) * num_a_ + a) * num_b_ + b;
  }

  int num_states_ = 0;
  int num_a_ = 0;
  int num_b_ = 0;
  std::vector<double> data_;
};

// Per-step, per-state value table V_h(x); index [h][x].
using ValueTable = std::vector<std::vector<double>>;

// Episodic two-player zero-sum Markov game with deterministic rewards and a
// fixed initial state. Steps are 0-based in code (h = 0 .. H-1).
class TabularMG {
 public:
  TabularMG() = default;
  // Validates on construction; throws ValidationError.
  TabularMG(Dims dims, int initial_state, std::vector<LayerTable> reward,
            std::vector<double> transition);

  const Dims& dims() const { return dims_; }
  int horizon() const { return dims_.horizon; }
  int num_states() const { return dims_.num_states; }
  int num_a() const { return dims_.num_a; }
  int num_b() const { return dims_.num_b; }
  int initial_state() const { return initial_state_; }

  const LayerTable& reward(int h) const { return reward_[h]; }
  double reward(int h, int x, int a, int b) const { return reward_[h](x, a, b); }

  // P_h(. | x, a, b) as a distribution over next states.
  std::span<const double> next_state_dist(int h, int x, int a, int b) const {
    const std::size_t row =
        ((static_cast<std::size_t>(h) * dims_.num_states + x) * dims_.num_a + a) *
            dims_.num_b + b;
    return {transition_.data() + row * dims_.num_states,
            static_cast<std::size_t>(dims_.num_states)};
  }

  const std::vector<LayerTable>& rewards() const { return reward_; }
  const std::vector<double>& transition() const { return transition_; }

  // [r^h + P_h V](x, a, b) for a next-step value vector V over states.
  LayerTable backup(int h, std::span<const double> next_values) const;

 private:
  Dims dims_;
  int initial_state_ = 0;
  std::vector<LayerTable> reward_;
  std::vector<double> transition_;  // (h, x, a, b, x') row-major
};

enum class Side { kMax, kMin };

// mu_h(x) or nu_h(x) for every (h, x).
class MarkovPolicy {
 public:
  MarkovPolicy() = default;
  MarkovPolicy(Side side, int horizon, int num_states, int num_actions);
  // Uniform policy of the given side for a game.
  static MarkovPolicy uniform(Side side, const Dims& dims);

  Side side() const { return side_; }
  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::span<double> row(int h, int x) {
    return {probs_.data() + offset(h, x), static_cast<std::size_t>(num_actions_)};
  }
  std::span<const double> row(int h, int x) const {
    return {probs_.data() + offset(h, x), static_cast<std::size_t>(num_actions_)};
  }
  double prob(int h, int x, int action) const { return probs_[offset(h, x) + action]; }
  void set_pure(int h, int x, int action);

  // Throws ValidationError unless every row is a distribution within 1e-12.
  void validate() const;
  // Throws DimensionError unless the policy fits `dims` for its side.
  void check_dims(const Dims& dims) const;

  bool operator==(const MarkovPolicy&) const = default;

 private:
  std::size_t offset(int h, int x) const {
    return (static_cast<std::size_t>(h) * num_states_ + x) * num_actions_;
  }

  Side side_ = Side::kMax;
  int horizon_ = 0;
  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<double> probs_;
};

struct Step {
  int x = 0;
  int a = 0;
  int b = 0;
  double r = 0.0;
  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::vector<Step> steps;  // exactly H entries
  int episode = 0;
  bool operator==(const Trajectory&) const = default;
};

// d^h(x, a, b) for every step.
struct OccupancyMeasure {
  std::vector<LayerTable> dist;

  // Sum over (x, a, b) of d^h(x, a, b) * table(x, a, b).
  double expect(int h, const LayerTable& table) const;
};

Trajectory sample_episode(const TabularMG& mg, const MarkovPolicy& mu,
                          const MarkovPolicy& nu, Rng& rng, int episode = 0);

OccupancyMeasure compute_occupancy(const TabularMG& mg, const MarkovPolicy& mu,
                                   const MarkovPolicy& nu);

// V^{mu,nu}_h(x) for h = 0 .. H (the last row is the terminal zero).
ValueTable policy_value(const TabularMG& mg, const MarkovPolicy& mu,
                        const MarkovPolicy& nu);

// Same as above, also returning Q^{mu,nu}_h.
ValueTable policy_value(const TabularMG& mg, const MarkovPolicy& mu,
                        const MarkovPolicy& nu, std::vector<LayerTable>* q_out);

// mu_h(x)^T block nu_h(x) for a row-major |A| x |B| block.
double bilinear(std::span<const double> block, std::span<const double> row_probs,
                std::span<const double> col_probs);

}  // namespace zsmg
