#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zsmg/function_class.hpp"
#include "zsmg/game.hpp"
#include "zsmg/oracle.hpp"

namespace zsmg {

struct HyperParams {
  double eta = 0.0;
  double lambda = 0.0;
  int T = 1;
  double beta = 2.0;
  std::uint64_t seed = 0;

  // Throws ValidationError on non-positive eta/beta-1/T or negative lambda.
  // The theory conditions eta*beta^2 <= 0.5 and lambda*beta^2 >= 1 are
  // returned as warnings, or thrown when `strict`.
  std::vector<std::string> validate(bool strict) const;
};

// eta = 1/(4 beta^2), lambda = sqrt(T kappa / (beta^2 dc)), with lambda raised
// to 1/beta^2 when below it (a notice is appended to `notices`).
// Throws std::invalid_argument on non-positive input.
HyperParams default_hyperparams(double beta, int T, double kappa, double dc,
                                std::vector<std::string>* notices = nullptr);

struct RegretRecord {
  int episode = 0;  // 1-based
  double v_star = 0.0;
  double v_exec = 0.0;
  double v_br = 0.0;
  double main_gap = 0.0;
  double booster_gap = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
};

// Exact values of (mu, nu) against the Nash value. cum_regret is
// previous_cum + inst_regret.
RegretRecord evaluate_episode(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu,
                              const NashSolution& nash, int episode = 1,
                              double previous_cum = 0.0);

// nu_h(x) = pure argmin_b mu_h(x)^T g^h(x, ., b), lowest index on ties.
MarkovPolicy booster_response(const QFunction& g, const MarkovPolicy& mu);

struct SelfPlayFlags {
  // Keep mu_t, nu_t and the trajectory of every episode.
  bool record_policies = false;
  // Enumerate both posteriors each episode into CSV text.
  bool dump_posterior = false;
  double posterior_cap = 1e5;
};

struct EpisodeArtifacts {
  std::vector<int> f_indices;
  std::vector<int> g_indices;
  MarkovPolicy mu;  // empty unless record_policies
  MarkovPolicy nu;
  Trajectory trajectory;
};

struct SelfPlayResult {
  std::vector<RegretRecord> records;
  std::vector<EpisodeArtifacts> episodes;
  std::string main_posterior_csv;
  std::string booster_posterior_csv;
  std::vector<std::string> warnings;
};

// Algorithm loop: per episode sample f_t, g_t from the two posteriors, play
// (mu_{f_t}, nu_{f_t,g_t}), update the data, and evaluate exactly.
// Deterministic given hp.seed.
SelfPlayResult run_selfplay(const TabularMG& mg, const FunctionClass& fc, const HyperParams& hp,
                            const SelfPlayFlags& flags = {});

// True when every layer of Q* has a member within `tol` in sup norm.
bool class_contains(const FunctionClass& fc, const std::vector<LayerTable>& q, double tol = 1e-9);

void write_regret_csv(std::ostream& os, const std::vector<RegretRecord>& records);

}  // namespace zsmg
