#include "zsmg/selfplay.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "zsmg/posterior.hpp"

namespace zsmg {

std::vector<std::string> HyperParams::validate(bool strict) const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("eta must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lambda must be non-negative");
  if (T < 1) throw ValidationError("T must be at least 1");
  if (!(beta > 1.0)) throw ValidationError("beta must exceed 1");

  std::vector<std::string> warnings;
  const double b2 = beta * beta;
  if (eta * b2 > 0.5)
    warnings.push_back("eta*beta^2 = " + format_double(eta * b2) + " exceeds 0.5");
  if (lambda * b2 < 1.0)
    warnings.push_back("lambda*beta^2 = " + format_double(lambda * b2) + " is below 1");
  if (strict && !warnings.empty()) throw ValidationError(warnings.front());
  return warnings;
}

HyperParams default_hyperparams(double beta, int T, double kappa, double dc,
                                std::vector<std::string>* notices) {
  if (!(beta > 0.0) || T <= 0 || !(kappa > 0.0) || !(dc > 0.0))
    throw std::invalid_argument("default_hyperparams needs positive beta, T, kappa and dc");
  HyperParams hp;
  hp.beta = beta;
  hp.T = T;
  const double b2 = beta * beta;
  hp.eta = 1.0 / (4.0 * b2);
  hp.lambda = std::sqrt(T * kappa / (b2 * dc));
  if (hp.lambda * b2 < 1.0) {
    if (notices)
      notices->push_back("lambda " + format_double(hp.lambda) + " raised to 1/beta^2 = " +
                         format_double(1.0 / b2));
    hp.lambda = 1.0 / b2;
  }
  return hp;
}

RegretRecord evaluate_episode(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu,
                              const NashSolution& nash, int episode, double previous_cum) {
  RegretRecord rec;
  rec.episode = episode;
  rec.v_star = nash.value();
  rec.v_exec = policy_value(mg, mu, nu)[0][mg.initial_state()];
  rec.v_br = best_response(mg, mu).value();
  rec.main_gap = rec.v_star - rec.v_exec;
  rec.booster_gap = rec.v_exec - rec.v_br;
  rec.inst_regret = rec.main_gap + rec.booster_gap;
  rec.cum_regret = previous_cum + rec.inst_regret;
  return rec;
}

MarkovPolicy booster_response(const QFunction& g, const MarkovPolicy& mu) {
  const int horizon = g.horizon();
  const LayerTable& first = g.layers.front();
  MarkovPolicy nu(Side::kMin, horizon, first.num_states(), first.num_b());
  for (int h = 0; h < horizon; ++h)
    for (int x = 0; x < first.num_states(); ++x)
      nu.set_pure(h, x, best_pure_response_value(state_matrix(g.layers[h], x), mu.row(h, x)).second);
  return nu;
}

bool class_contains(const FunctionClass& fc, const std::vector<LayerTable>& q, double tol) {
  for (std::size_t h = 0; h < fc.layers.size(); ++h) {
    bool found = false;
    for (const auto& member : fc.layers[h]) {
      double d = 0.0;
      for (std::size_t i = 0; i < member.data().size(); ++i)
        d = std::max(d, std::abs(member.data()[i] - q[h].data()[i]));
      if (d <= tol) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

SelfPlayResult run_selfplay(const TabularMG& mg, const FunctionClass& fc, const HyperParams& hp,
                            const SelfPlayFlags& flags) {
  SelfPlayResult result;
  result.warnings = hp.validate(false);
  fc.validate();
  if (!(fc.dims == mg.dims())) throw DimensionError("function class does not match the game");

  const NashSolution nash = solve_nash(mg);
  if (!class_contains(fc, nash.q_star)) result.warnings.push_back("Q* is not in the class");

  const int x1 = mg.initial_state();
  const ClassSolutions cache = ClassSolutions::build(fc);
  LossLedger ledger(fc, cache);
  TransitionCounts counts(mg.dims());
  Rng rng(hp.seed);

  std::ostringstream main_csv;
  std::ostringstream booster_csv;
  result.records.reserve(hp.T);
  result.episodes.reserve(hp.T);
  double cum = 0.0;
  for (int t = 1; t <= hp.T; ++t) {
    const PosteriorChain main = build_main_posterior(fc, cache, ledger, x1, hp.eta, hp.lambda);
    std::vector<int> f = sample_chain(main, rng);
    const MarkovPolicy mu = induce_policy(fc, cache, f).mu;

    const PosteriorChain booster =
        build_booster_posterior(fc, mu, counts, x1, hp.eta, hp.lambda);
    std::vector<int> g = sample_chain(booster, rng);
    const MarkovPolicy nu = booster_response(fc.materialize(g), mu);

    if (flags.dump_posterior) {
      write_posterior_csv(main_csv, t, enumerate_posterior(main, flags.posterior_cap), t == 1);
      write_posterior_csv(booster_csv, t, enumerate_posterior(booster, flags.posterior_cap),
                          t == 1);
    }

    Trajectory zeta = sample_episode(mg, mu, nu, rng, t);
    ledger.update(zeta, fc);
    counts.add(zeta);

    const RegretRecord rec = evaluate_episode(mg, mu, nu, nash, t, cum);
    cum = rec.cum_regret;
    result.records.push_back(rec);

    EpisodeArtifacts art;
    art.f_indices = std::move(f);
    art.g_indices = std::move(g);
    if (flags.record_policies) {
      art.mu = mu;
      art.nu = nu;
      art.trajectory = std::move(zeta);
    }
    result.episodes.push_back(std::move(art));
  }
  result.main_posterior_csv = main_csv.str();
  result.booster_posterior_csv = booster_csv.str();
  return result;
}

void write_regret_csv(std::ostream& os, const std::vector<RegretRecord>& records) {
  os << "episode,v_star,v_exec,v_br,main_gap,booster_gap,inst_regret,cum_regret\n";
  for (const auto& r : records)
    os << r.episode << ',' << format_double(r.v_star) << ',' << format_double(r.v_exec) << ','
       << format_double(r.v_br) << ',' << format_double(r.main_gap) << ','
       << format_double(r.booster_gap) << ',' << format_double(r.inst_regret) << ','
       << format_double(r.cum_regret) << '\n';
}

}  // namespace zsmg
