#include "zsmg/function_class.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zsmg/oracle.hpp"

namespace zsmg {

namespace {

void check_bounds(const LayerTable& layer, double beta, const std::string& what) {
  for (double v : layer.data())
    if (!std::isfinite(v) || v < 0.0 || v > beta - 1.0)
      throw ValidationError(what + " has an entry outside [0, beta-1]");
}

double sup_distance(const LayerTable& lhs, const LayerTable& rhs) {
  double d = 0.0;
  for (std::size_t i = 0; i < lhs.data().size(); ++i)
    d = std::max(d, std::abs(lhs.data()[i] - rhs.data()[i]));
  return d;
}

LayerTable canonical(LayerTable t) {
  for (double& v : t.data())
    if (v == 0.0) v = 0.0;  // folds -0.0
  return t;
}

// Policy induced by a single layer, stored at step h of a full-horizon policy.
MarkovPolicy layer_policy(const LayerTable& layer, int horizon, int h) {
  MarkovPolicy mu(Side::kMax, horizon, layer.num_states(), layer.num_a());
  for (int x = 0; x < layer.num_states(); ++x) {
    const auto sol = solve_matrix_game(state_matrix(layer, x));
    std::copy(sol.row_strategy.begin(), sol.row_strategy.end(), mu.row(h, x).begin());
  }
  return mu;
}

}  // namespace

void QFunction::validate() const {
  for (std::size_t h = 0; h < layers.size(); ++h)
    check_bounds(layers[h], beta, "Q-function layer " + std::to_string(h));
}

double FunctionClass::joint_size() const {
  double n = 1.0;
  for (const auto& l : layers) n *= static_cast<double>(l.size());
  return n;
}

QFunction FunctionClass::materialize(std::span<const int> indices) const {
  QFunction f;
  f.beta = beta;
  f.layers.reserve(layers.size());
  for (std::size_t h = 0; h < layers.size(); ++h) f.layers.push_back(layers[h][indices[h]]);
  return f;
}

void FunctionClass::set_uniform_prior() {
  prior.resize(layers.size());
  for (std::size_t h = 0; h < layers.size(); ++h)
    prior[h].assign(layers[h].size(), 1.0 / static_cast<double>(layers[h].size()));
}

void FunctionClass::validate() const {
  if (static_cast<int>(layers.size()) != dims.horizon || prior.size() != layers.size())
    throw ValidationError("function class must have one layer list and prior per step");
  if (!(beta > 1.0)) throw ValidationError("beta must exceed 1");
  for (std::size_t h = 0; h < layers.size(); ++h) {
    if (layers[h].empty()) throw ValidationError("empty function-class layer");
    if (prior[h].size() != layers[h].size())
      throw ValidationError("prior length does not match layer size");
    double total = 0.0;
    for (double p : prior[h]) {
      if (!(p > 0.0)) throw ValidationError("prior weights must be positive");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbTolerance)
      throw ValidationError("prior does not sum to 1");
    for (std::size_t k = 0; k < layers[h].size(); ++k) {
      const LayerTable& t = layers[h][k];
      if (t.num_states() != dims.num_states || t.num_a() != dims.num_a ||
          t.num_b() != dims.num_b)
        throw DimensionError("function-class member has the wrong shape");
      check_bounds(t, beta, "member " + std::to_string(k) + " of layer " + std::to_string(h));
    }
  }
}

LayerSolutions solve_layer(const LayerTable& layer) {
  LayerSolutions out;
  out.reserve(layer.num_states());
  for (int x = 0; x < layer.num_states(); ++x)
    out.push_back(solve_matrix_game(state_matrix(layer, x)));
  return out;
}

namespace {

InducedPolicyBundle assemble(std::vector<LayerSolutions> solutions, int num_a) {
  const int horizon = static_cast<int>(solutions.size());
  const int num_states = static_cast<int>(solutions.front().size());
  InducedPolicyBundle bundle;
  bundle.mu = MarkovPolicy(Side::kMax, horizon, num_states, num_a);
  bundle.v.assign(horizon, std::vector<double>(num_states, 0.0));
  for (int h = 0; h < horizon; ++h)
    for (int x = 0; x < num_states; ++x) {
      const auto& s = solutions[h][x];
      std::copy(s.row_strategy.begin(), s.row_strategy.end(), bundle.mu.row(h, x).begin());
      bundle.v[h][x] = s.value;
    }
  bundle.solutions = std::move(solutions);
  return bundle;
}

}  // namespace

InducedPolicyBundle induce_policy(const QFunction& f) {
  std::vector<LayerSolutions> sols;
  sols.reserve(f.layers.size());
  for (const auto& layer : f.layers) sols.push_back(solve_layer(layer));
  return assemble(std::move(sols), f.layers.front().num_a());
}

ClassSolutions ClassSolutions::build(const FunctionClass& fc) {
  ClassSolutions cs;
  cs.members.resize(fc.layers.size());
  for (std::size_t h = 0; h < fc.layers.size(); ++h)
    for (const auto& layer : fc.layers[h]) cs.members[h].push_back(solve_layer(layer));
  return cs;
}

InducedPolicyBundle induce_policy(const FunctionClass& fc, const ClassSolutions& cache,
                                  std::span<const int> indices) {
  std::vector<LayerSolutions> sols;
  sols.reserve(fc.layers.size());
  for (std::size_t h = 0; h < fc.layers.size(); ++h) sols.push_back(cache.members[h][indices[h]]);
  return assemble(std::move(sols), fc.dims.num_a);
}

double induced_min_value(const LayerTable& layer, const MarkovPolicy& mu, int h, int x) {
  return best_pure_response_value(state_matrix(layer, x), mu.row(h, x)).first;
}

CompletenessDefect completeness_defect(const TabularMG& mg, const FunctionClass& fc) {
  const int horizon = mg.horizon();
  CompletenessDefect worst;
  for (int h = 0; h < horizon; ++h) {
    auto nearest = [&](const LayerTable& target) {
      double best = kInf;
      for (const auto& member : fc.layers[h]) best = std::min(best, sup_distance(target, member));
      return best;
    };
    if (h + 1 == horizon) {
      const double d = nearest(mg.reward(h));
      if (d > worst.value || worst.h < 0) worst = {d, h, -1, -1};
      continue;
    }
    for (int i = 0; i < fc.size(h + 1); ++i) {
      const MarkovPolicy mu = layer_policy(fc.layers[h + 1][i], horizon, h + 1);
      for (int j = 0; j < fc.size(h + 1); ++j) {
        const double d = nearest(bellman_apply_mu(mg, fc.layers[h + 1][j], mu, h));
        if (d > worst.value || worst.h < 0) worst = {d, h, i, j};
      }
    }
  }
  return worst;
}

ClosureResult build_closure_class(const TabularMG& mg, const std::vector<QFunction>& seeds,
                                  const ClosureOptions& options) {
  const Dims& dims = mg.dims();
  const int horizon = dims.horizon;
  const double beta = options.beta > 0.0 ? options.beta : horizon + 1.0;
  for (const auto& s : seeds) {
    if (s.horizon() != horizon) throw DimensionError("seed horizon does not match the game");
    QFunction copy = s;
    copy.beta = beta;
    copy.validate();
  }

  FunctionClass fc;
  fc.dims = dims;
  fc.beta = beta;
  fc.layers.resize(horizon);

  auto add = [&](const QFunction& f) {
    for (int h = 0; h < horizon; ++h) {
      LayerTable t = canonical(f.layers[h]);
      check_bounds(t, beta, "closure member at step " + std::to_string(h));
      auto& layer = fc.layers[h];
      if (std::find(layer.begin(), layer.end(), t) != layer.end()) continue;
      if (options.truncate_per_layer > 0 && layer.size() >= options.truncate_per_layer) continue;
      if (layer.size() >= options.size_cap)
        throw ValidationError("closure exceeds the configured size cap");
      layer.push_back(std::move(t));
    }
  };

  const NashSolution nash = solve_nash(mg);
  add(QFunction{nash.q_star, beta});

  // Whole functions that act as policy sources and backup targets.
  std::vector<QFunction> generators;
  generators.push_back(QFunction{nash.q_star, beta});
  for (const auto& s : seeds) {
    const auto br = best_response(mg, induce_policy(s).mu);
    QFunction q{br.q_br, beta};
    add(q);
    generators.push_back(s);
    generators.push_back(std::move(q));
  }

  for (int round = 0; round < options.depth; ++round) {
    std::vector<QFunction> fresh;
    for (const auto& f : generators) {
      const MarkovPolicy mu = induce_policy(f).mu;
      for (const auto& g : generators) {
        QFunction backed{std::vector<LayerTable>(horizon), beta};
        for (int h = 0; h < horizon; ++h)
          backed.layers[h] = bellman_apply_mu(mg, h + 1 < horizon ? g.layers[h + 1] : g.layers[h],
                                              mu, h);
        add(backed);
        fresh.push_back(std::move(backed));
      }
    }
    for (auto& f : fresh)
      if (std::find(generators.begin(), generators.end(), f) == generators.end())
        generators.push_back(std::move(f));
  }

  if (options.include_seeds)
    for (const auto& s : seeds) add(QFunction{s.layers, beta});

  fc.set_uniform_prior();
  fc.validate();
  ClosureResult result{std::move(fc), {}};
  result.defect = completeness_defect(mg, result.fc);
  return result;
}

KappaResult compute_kappa(const TabularMG& mg, const FunctionClass& fc, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  const int horizon = mg.horizon();
  KappaResult out;

  // -ln p_0^h of the members within eps (sup norm) of `target`; +inf if none.
  auto neg_log_mass = [&](int h, const LayerTable& target) {
    double mass = 0.0;
    for (int k = 0; k < fc.size(h); ++k)
      if (sup_distance(fc.layers[h][k], target) <= epsilon) mass += fc.prior[h][k];
    return mass > 0.0 ? -std::log(mass) : kInf;
  };

  for (int h = 0; h < horizon; ++h) {
    if (h + 1 == horizon) {
      const double term = neg_log_mass(h, mg.reward(h));
      if (std::isinf(term) && !out.offender) out.offender = KappaResult::Offender{h, -1, -1};
      out.kappa += term;
      out.kappa1 += term;
      continue;
    }
    const auto& next = fc.layers[h + 1];
    double worst = 0.0;
    for (int i = 0; i < fc.size(h + 1); ++i) {
      const MarkovPolicy mu = layer_policy(next[i], horizon, h + 1);
      for (int j = 0; j < fc.size(h + 1); ++j) {
        const double term = neg_log_mass(h, bellman_apply_mu(mg, next[j], mu, h));
        if (std::isinf(term) && !out.offender) out.offender = KappaResult::Offender{h, i, j};
        worst = std::max(worst, term);
      }
    }
    double worst1 = 0.0;
    for (int j = 0; j < fc.size(h + 1); ++j)
      worst1 = std::max(worst1, neg_log_mass(h, bellman_apply(mg, next[j], h)));
    out.kappa += worst;
    out.kappa1 += worst1;
  }
  return out;
}

}  // namespace zsmg
