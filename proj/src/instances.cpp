#include "zsmg/instances.hpp"

#include <cmath>
#include <stdexcept>

namespace zsmg {

namespace {

// Symmetric Dirichlet(1) by normalized exponentials.
std::vector<double> dirichlet(int n, Rng& rng) {
  std::vector<double> w(n);
  for (;;) {
    double total = 0.0;
    for (double& v : w) {
      v = -std::log(1.0 - uniform01(rng));
      total += v;
    }
    if (total > 0.0) {
      for (double& v : w) v /= total;
      return w;
    }
  }
}

void check_dims(const Dims& dims) {
  if (dims.horizon < 1 || dims.num_states < 1 || dims.num_a < 1 || dims.num_b < 1)
    throw std::invalid_argument("dimensions must be positive");
}

}  // namespace

TabularMG gen_random_tabular(const Dims& dims, double reward_sparsity, std::uint64_t seed,
                             int initial_state) {
  check_dims(dims);
  if (!(reward_sparsity >= 0.0 && reward_sparsity <= 1.0))
    throw std::invalid_argument("reward sparsity must lie in [0, 1]");
  Rng rng(seed);
  std::vector<LayerTable> reward;
  for (int h = 0; h < dims.horizon; ++h) {
    LayerTable r(dims);
    for (double& v : r.data()) {
      v = uniform01(rng);
      if (uniform01(rng) < reward_sparsity) v = 0.0;
    }
    reward.push_back(std::move(r));
  }
  std::vector<double> transition;
  transition.reserve(static_cast<std::size_t>(dims.horizon) * dims.cells() * dims.num_states);
  for (int row = 0; row < dims.horizon * dims.cells(); ++row) {
    const auto p = dirichlet(dims.num_states, rng);
    transition.insert(transition.end(), p.begin(), p.end());
  }
  return TabularMG(dims, initial_state, std::move(reward), std::move(transition));
}

void LinearMGSpec::validate(const Dims& dims) const {
  auto is_distribution = [](const std::vector<double>& p) {
    double total = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= kProbTolerance;
  };
  if (d < 1) throw ValidationError("feature dimension must be positive");
  if (static_cast<int>(phi.size()) != dims.horizon ||
      static_cast<int>(theta.size()) != dims.horizon ||
      static_cast<int>(anchors.size()) != dims.horizon)
    throw ValidationError("linear spec must have one entry per step");
  for (int h = 0; h < dims.horizon; ++h) {
    if (static_cast<int>(phi[h].size()) != dims.cells() || static_cast<int>(theta[h].size()) != d ||
        static_cast<int>(anchors[h].size()) != d)
      throw ValidationError("linear spec has the wrong shape");
    for (const auto& psi : anchors[h])
      if (static_cast<int>(psi.size()) != dims.num_states || !is_distribution(psi))
        throw ValidationError("anchor is not a next-state distribution");
    for (const auto& f : phi[h]) {
      if (static_cast<int>(f.size()) != d || !is_distribution(f))
        throw ValidationError("feature vector is not in the simplex");
      double r = 0.0;
      for (int j = 0; j < d; ++j) r += f[j] * theta[h][j];
      if (r < 0.0 || r > 1.0) throw ValidationError("linear reward outside [0, 1]");
    }
  }
}

TabularMG materialize_linear(const Dims& dims, const LinearMGSpec& spec, int initial_state) {
  spec.validate(dims);
  std::vector<LayerTable> reward;
  std::vector<double> transition;
  transition.reserve(static_cast<std::size_t>(dims.horizon) * dims.cells() * dims.num_states);
  for (int h = 0; h < dims.horizon; ++h) {
    LayerTable r(dims);
    for (int c = 0; c < dims.cells(); ++c) {
      const auto& f = spec.phi[h][c];
      double rv = 0.0;
      std::vector<double> p(dims.num_states, 0.0);
      for (int j = 0; j < spec.d; ++j) {
        rv += f[j] * spec.theta[h][j];
        for (int y = 0; y < dims.num_states; ++y) p[y] += f[j] * spec.anchors[h][j][y];
      }
      r.data()[c] = rv;
      transition.insert(transition.end(), p.begin(), p.end());
    }
    reward.push_back(std::move(r));
  }
  return TabularMG(dims, initial_state, std::move(reward), std::move(transition));
}

std::pair<TabularMG, LinearMGSpec> gen_linear_mg(const Dims& dims, int d, std::uint64_t seed,
                                                 LinearFeatures features, int initial_state) {
  check_dims(dims);
  if (d < 1 || d > dims.cells())
    throw std::invalid_argument("feature dimension must lie in [1, |X||A||B|]");
  if (features == LinearFeatures::kOneHot && d != dims.cells())
    throw std::invalid_argument("one-hot features need d = |X||A||B|");
  Rng rng(seed);
  LinearMGSpec spec;
  spec.d = d;
  for (int h = 0; h < dims.horizon; ++h) {
    std::vector<std::vector<double>> anchors;
    for (int j = 0; j < d; ++j) anchors.push_back(dirichlet(dims.num_states, rng));
    std::vector<double> theta(d);
    for (double& v : theta) v = uniform01(rng);
    std::vector<std::vector<double>> phi;
    for (int c = 0; c < dims.cells(); ++c) {
      if (features == LinearFeatures::kOneHot) {
        std::vector<double> e(d, 0.0);
        e[c] = 1.0;
        phi.push_back(std::move(e));
      } else {
        phi.push_back(dirichlet(d, rng));
      }
    }
    spec.anchors.push_back(std::move(anchors));
    spec.theta.push_back(std::move(theta));
    spec.phi.push_back(std::move(phi));
  }
  TabularMG mg = materialize_linear(dims, spec, initial_state);
  return {std::move(mg), std::move(spec)};
}

QFunction random_qfunction(const Dims& dims, double beta, Rng& rng) {
  QFunction f;
  f.beta = beta;
  for (int h = 0; h < dims.horizon; ++h) {
    LayerTable t(dims);
    for (double& v : t.data()) v = (beta - 1.0) * uniform01(rng);
    f.layers.push_back(std::move(t));
  }
  return f;
}

Benchmark make_benchmark(std::uint64_t game_seed, std::uint64_t class_seed) {
  const Dims dims{2, 2, 2, 2};
  const double beta = 3.0;
  TabularMG mg = gen_random_tabular(dims, 0.0, game_seed);
  Rng rng(class_seed);
  std::vector<QFunction> seeds;
  for (int i = 0; i < 3; ++i) seeds.push_back(random_qfunction(dims, beta, rng));
  ClosureOptions opts;
  opts.include_seeds = true;
  opts.truncate_per_layer = 4;
  opts.beta = beta;
  ClosureResult closure = build_closure_class(mg, seeds, opts);
  return {std::move(mg), std::move(closure.fc), closure.defect};
}

}  // namespace zsmg
