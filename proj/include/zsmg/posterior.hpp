#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "zsmg/function_class.hpp"
#include "zsmg/game.hpp"

namespace zsmg {

// Cumulative squared TD losses of every (f^h_i, f^{h+1}_j) pair over S_t.
// The successor of the last step is the zero layer, so F_{H+1} has size 1.
class LossLedger {
 public:
  LossLedger() = default;
  LossLedger(const FunctionClass& fc, const ClassSolutions& cache);

  int horizon() const { return static_cast<int>(cum_loss_.size()); }
  int size(int h) const { return sizes_[h]; }
  int next_size(int h) const { return h + 1 < horizon() ? sizes_[h + 1] : 1; }
  int episodes() const { return episodes_; }

  double loss(int h, int i, int j) const { return cum_loss_[h][index(h, i, j)]; }
  std::span<const double> losses(int h) const { return cum_loss_[h]; }
  // V_{f_j^{h+1}}(x); zero at the last step.
  double next_value(int h, int j, int x) const {
    return h + 1 < horizon() ? next_values_[h][j][x] : 0.0;
  }

  // Adds one squared residual per (h, i, j) cell for the trajectory.
  void update(const Trajectory& zeta, const FunctionClass& fc);

 private:
  std::size_t index(int h, int i, int j) const {
    return static_cast<std::size_t>(i) * next_size(h) + j;
  }

  std::vector<int> sizes_;
  std::vector<std::vector<double>> cum_loss_;                  // [h][i * next + j]
  std::vector<std::vector<std::vector<double>>> next_values_;  // [h][j][x]
  int episodes_ = 0;
};

inline void update_ledger(LossLedger& ledger, const Trajectory& zeta, const FunctionClass& fc) {
  ledger.update(zeta, fc);
}

// Visit counts of (x^h, a^h, b^h, x^{h+1}) per step: a sufficient statistic
// of S_t for every squared loss, since rewards are deterministic.
class TransitionCounts {
 public:
  TransitionCounts() = default;
  explicit TransitionCounts(const Dims& dims);
  static TransitionCounts from_history(const Dims& dims, std::span<const Trajectory> history);

  void add(const Trajectory& zeta);
  int episodes() const { return episodes_; }

  struct Entry {
    int x, a, b, next;
    double reward;  // observed r^h at (x, a, b)
    double count;
  };
  // Non-zero cells of step h in (x, a, b, x') order.
  std::vector<Entry> entries(int h) const;

 private:
  Dims dims_;
  std::vector<std::vector<double>> counts_;   // [h][((x*A + a)*B + b)*X + x']
  std::vector<std::vector<double>> rewards_;  // [h][(x*A + a)*B + b]
  int episodes_ = 0;
};

// Joint posterior over index vectors (k_1, ..., k_H) in chain form:
//   log p(k) = unary(k_1) + sum_h log q_h(k_h | k_{h+1}) - log Z,  k_{H+1} = 0.
struct PosteriorChain {
  std::vector<int> sizes;
  std::vector<double> unary;                // [k_1]
  std::vector<std::vector<double>> log_q;   // [h][i * next_size(h) + j]
  std::vector<std::vector<double>> messages;  // [h][j], M_h over F_{h+1}
  double log_normalizer = 0.0;

  int horizon() const { return static_cast<int>(sizes.size()); }
  int next_size(int h) const { return h + 1 < horizon() ? sizes[h + 1] : 1; }
  double log_q_at(int h, int i, int j) const {
    return log_q[h][static_cast<std::size_t>(i) * next_size(h) + j];
  }
  // Chain log-probability, normalized by the message-passing log Z.
  double log_prob(std::span<const int> indices) const;
};

// Assembles a chain from per-step losses L^h(i, j) and a layer-1 unary term.
// Throws std::invalid_argument on NaN input or eta <= 0.
PosteriorChain build_chain(const FunctionClass& fc, std::vector<double> unary,
                           const std::vector<std::vector<double>>& losses, double eta);

// Main agent: unary lambda * V_{f,1}(x^1), losses from the ledger.
PosteriorChain build_main_posterior(const FunctionClass& fc, const ClassSolutions& cache,
                                    const LossLedger& ledger, int initial_state, double eta,
                                    double lambda);

// Booster agent for a fixed max-player policy mu: unary -lambda * V^mu_{g,1}(x^1)
// and L^h_mu recomputed from the whole history.
PosteriorChain build_booster_posterior(const FunctionClass& fc, const MarkovPolicy& mu,
                                       const TransitionCounts& history, int initial_state,
                                       double eta, double lambda);

PosteriorChain build_booster_posterior(const FunctionClass& fc, const MarkovPolicy& mu,
                                       std::span<const Trajectory> history, int initial_state,
                                       double eta, double lambda);

// Exact joint draw: backward messages, then ancestral sampling from layer H.
std::vector<int> sample_chain(const PosteriorChain& chain, Rng& rng);

struct PosteriorAtom {
  std::vector<int> indices;
  double log_prob = 0.0;
};

// Every atom with its log-probability, normalized by direct summation.
// Throws std::length_error when prod_h |F_h| exceeds `cap`.
std::vector<PosteriorAtom> enumerate_posterior(const PosteriorChain& chain,
                                               double cap = 1e6);

// CSV rows "episode,k1,...,kH,log_prob"; header when `with_header`.
void write_posterior_csv(std::ostream& os, int episode, const std::vector<PosteriorAtom>& atoms,
                         bool with_header);

}  // namespace zsmg
