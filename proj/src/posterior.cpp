#include "zsmg/posterior.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "zsmg/log_math.hpp"
#include "zsmg/oracle.hpp"

namespace zsmg {

LossLedger::LossLedger(const FunctionClass& fc, const ClassSolutions& cache) {
  const int horizon = static_cast<int>(fc.layers.size());
  sizes_.resize(horizon);
  for (int h = 0; h < horizon; ++h) sizes_[h] = fc.size(h);
  cum_loss_.resize(horizon);
  next_values_.resize(horizon);
  for (int h = 0; h < horizon; ++h) {
    cum_loss_[h].assign(static_cast<std::size_t>(sizes_[h]) * next_size(h), 0.0);
    if (h + 1 == horizon) continue;
    for (const auto& sols : cache.members[h + 1]) {
      std::vector<double> v;
      v.reserve(sols.size());
      for (const auto& s : sols) v.push_back(s.value);
      next_values_[h].push_back(std::move(v));
    }
  }
}

void LossLedger::update(const Trajectory& zeta, const FunctionClass& fc) {
  if (static_cast<int>(zeta.steps.size()) != horizon())
    throw DimensionError("trajectory length does not match the horizon");
  for (int h = 0; h < horizon(); ++h) {
    const Step& s = zeta.steps[h];
    const int next_x = h + 1 < horizon() ? zeta.steps[h + 1].x : 0;
    std::vector<double>& cells = cum_loss_[h];
    for (int i = 0; i < sizes_[h]; ++i) {
      const double fi = fc.layers[h][i](s.x, s.a, s.b) - s.r;
      for (int j = 0; j < next_size(h); ++j) {
        const double e = fi - next_value(h, j, next_x);
        cells[index(h, i, j)] += e * e;
      }
    }
  }
  ++episodes_;
}

TransitionCounts::TransitionCounts(const Dims& dims) : dims_(dims) {
  counts_.assign(dims.horizon, std::vector<double>(static_cast<std::size_t>(dims.cells()) *
                                                        dims.num_states, 0.0));
  rewards_.assign(dims.horizon, std::vector<double>(dims.cells(), 0.0));
}

TransitionCounts TransitionCounts::from_history(const Dims& dims,
                                                std::span<const Trajectory> history) {
  TransitionCounts c(dims);
  for (const auto& t : history) c.add(t);
  return c;
}

void TransitionCounts::add(const Trajectory& zeta) {
  if (static_cast<int>(zeta.steps.size()) != dims_.horizon)
    throw DimensionError("trajectory length does not match the horizon");
  for (int h = 0; h < dims_.horizon; ++h) {
    const Step& s = zeta.steps[h];
    const int next_x = h + 1 < dims_.horizon ? zeta.steps[h + 1].x : 0;
    const std::size_t sab =
        (static_cast<std::size_t>(s.x) * dims_.num_a + s.a) * dims_.num_b + s.b;
    counts_[h][sab * dims_.num_states + next_x] += 1.0;
    rewards_[h][sab] = s.r;
  }
  ++episodes_;
}

std::vector<TransitionCounts::Entry> TransitionCounts::entries(int h) const {
  std::vector<Entry> out;
  const auto& c = counts_[h];
  std::size_t idx = 0;
  std::size_t sab = 0;
  for (int x = 0; x < dims_.num_states; ++x)
    for (int a = 0; a < dims_.num_a; ++a)
      for (int b = 0; b < dims_.num_b; ++b, ++sab)
        for (int y = 0; y < dims_.num_states; ++y, ++idx)
          if (c[idx] > 0.0) out.push_back({x, a, b, y, rewards_[h][sab], c[idx]});
  return out;
}

double PosteriorChain::log_prob(std::span<const int> indices) const {
  double lp = unary[indices[0]];
  for (int h = 0; h < horizon(); ++h)
    lp += log_q_at(h, indices[h], h + 1 < horizon() ? indices[h + 1] : 0);
  return lp - log_normalizer;
}

PosteriorChain build_chain(const FunctionClass& fc, std::vector<double> unary,
                           const std::vector<std::vector<double>>& losses, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  const int horizon = static_cast<int>(fc.layers.size());
  PosteriorChain chain;
  chain.sizes.resize(horizon);
  for (int h = 0; h < horizon; ++h) chain.sizes[h] = fc.size(h);
  for (double u : unary)
    if (std::isnan(u)) throw std::invalid_argument("NaN in posterior unary term");
  chain.unary = std::move(unary);

  chain.log_q.resize(horizon);
  for (int h = 0; h < horizon; ++h) {
    const int n = chain.sizes[h];
    const int next = chain.next_size(h);
    std::vector<double>& lq = chain.log_q[h];
    lq.assign(static_cast<std::size_t>(n) * next, 0.0);
    std::vector<double> column(n);
    for (int j = 0; j < next; ++j) {
      for (int i = 0; i < n; ++i) {
        const double l = losses[h][static_cast<std::size_t>(i) * next + j];
        if (std::isnan(l)) throw std::invalid_argument("NaN in posterior loss");
        column[i] = std::log(fc.prior[h][i]) - eta * l;
      }
      const double denom = log_sum_exp(column);
      for (int i = 0; i < n; ++i) lq[static_cast<std::size_t>(i) * next + j] = column[i] - denom;
    }
  }

  // M_h(j) = log sum_i exp(incoming_h(i) + log q_h(i | j)), incoming_0 = unary.
  chain.messages.resize(horizon);
  std::vector<double> incoming = chain.unary;
  for (int h = 0; h < horizon; ++h) {
    const int n = chain.sizes[h];
    const int next = chain.next_size(h);
    std::vector<double> terms(n);
    std::vector<double>& m = chain.messages[h];
    m.assign(next, 0.0);
    for (int j = 0; j < next; ++j) {
      for (int i = 0; i < n; ++i) terms[i] = incoming[i] + chain.log_q_at(h, i, j);
      m[j] = log_sum_exp(terms);
    }
    incoming = m;
  }
  chain.log_normalizer = chain.messages.back()[0];
  return chain;
}

PosteriorChain build_main_posterior(const FunctionClass& fc, const ClassSolutions& cache,
                                    const LossLedger& ledger, int initial_state, double eta,
                                    double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  std::vector<double> unary(fc.size(0));
  for (int i = 0; i < fc.size(0); ++i)
    unary[i] = lambda * cache.members[0][i][initial_state].value;
  std::vector<std::vector<double>> losses(ledger.horizon());
  for (int h = 0; h < ledger.horizon(); ++h)
    losses[h].assign(ledger.losses(h).begin(), ledger.losses(h).end());
  return build_chain(fc, std::move(unary), losses, eta);
}

PosteriorChain build_booster_posterior(const FunctionClass& fc, const MarkovPolicy& mu,
                                       const TransitionCounts& history, int initial_state,
                                       double eta, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  mu.check_dims(fc.dims);
  const int horizon = static_cast<int>(fc.layers.size());

  std::vector<double> unary(fc.size(0));
  for (int i = 0; i < fc.size(0); ++i)
    unary[i] = -lambda * induced_min_value(fc.layers[0][i], mu, 0, initial_state);

  std::vector<std::vector<double>> losses(horizon);
  for (int h = 0; h < horizon; ++h) {
    const int n = fc.size(h);
    const int next = h + 1 < horizon ? fc.size(h + 1) : 1;
    // V^mu_{g_j^{h+1}}(x) for every successor candidate and state.
    std::vector<std::vector<double>> vmu(next, std::vector<double>(fc.dims.num_states, 0.0));
    if (h + 1 < horizon)
      for (int j = 0; j < next; ++j) vmu[j] = min_values(fc.layers[h + 1][j], mu, h + 1);

    losses[h].assign(static_cast<std::size_t>(n) * next, 0.0);
    for (const auto& e : history.entries(h))
      for (int i = 0; i < n; ++i) {
        const double gi = fc.layers[h][i](e.x, e.a, e.b) - e.reward;
        for (int j = 0; j < next; ++j) {
          const double r = gi - vmu[j][e.next];
          losses[h][static_cast<std::size_t>(i) * next + j] += e.count * r * r;
        }
      }
  }
  return build_chain(fc, std::move(unary), losses, eta);
}

PosteriorChain build_booster_posterior(const FunctionClass& fc, const MarkovPolicy& mu,
                                       std::span<const Trajectory> history, int initial_state,
                                       double eta, double lambda) {
  return build_booster_posterior(fc, mu, TransitionCounts::from_history(fc.dims, history),
                                 initial_state, eta, lambda);
}

std::vector<int> sample_chain(const PosteriorChain& chain, Rng& rng) {
  const int horizon = chain.horizon();
  std::vector<int> out(horizon, 0);
  std::vector<double> weights;
  int successor = 0;
  for (int h = horizon - 1; h >= 0; --h) {
    const int n = chain.sizes[h];
    const std::vector<double>& incoming = h == 0 ? chain.unary : chain.messages[h - 1];
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) weights[i] = incoming[i] + chain.log_q_at(h, i, successor);
    const double lse = log_sum_exp(weights);
    for (double& w : weights) w = std::exp(w - lse);
    successor = static_cast<int>(draw_index(weights, rng));
    out[h] = successor;
  }
  return out;
}

std::vector<PosteriorAtom> enumerate_posterior(const PosteriorChain& chain, double cap) {
  double total = 1.0;
  for (int n : chain.sizes) total *= n;
  if (total > cap) throw std::length_error("posterior enumeration exceeds the configured cap");
  const int horizon = chain.horizon();
  std::vector<PosteriorAtom> atoms;
  atoms.reserve(static_cast<std::size_t>(total));
  std::vector<int> idx(horizon, 0);
  for (;;) {
    double lp = chain.unary[idx[0]];
    for (int h = 0; h < horizon; ++h)
      lp += chain.log_q_at(h, idx[h], h + 1 < horizon ? idx[h + 1] : 0);
    atoms.push_back({idx, lp});
    int h = horizon - 1;
    while (h >= 0 && ++idx[h] == chain.sizes[h]) idx[h--] = 0;
    if (h < 0) break;
  }
  std::vector<double> lps;
  lps.reserve(atoms.size());
  for (const auto& a : atoms) lps.push_back(a.log_prob);
  const double z = log_sum_exp(lps);
  for (auto& a : atoms) a.log_prob -= z;
  return atoms;
}

void write_posterior_csv(std::ostream& os, int episode, const std::vector<PosteriorAtom>& atoms,
                         bool with_header) {
  if (atoms.empty()) return;
  const std::size_t horizon = atoms.front().indices.size();
  if (with_header) {
    os << "episode";
    for (std::size_t h = 1; h <= horizon; ++h) os << ",k" << h;
    os << ",log_prob\n";
  }
  for (const auto& a : atoms) {
    os << episode;
    for (int k : a.indices) os << ',' << k;
    os << ',' << format_double(a.log_prob) << '\n';
  }
}

}  // namespace zsmg
