#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "zsmg/diagnostics.hpp"
#include "zsmg/instances.hpp"

using namespace zsmg;
using namespace zsmg::testing;

namespace {

// Sum over all paths of prob * residual(h, x, a, b), independent of the
// occupancy recursion.
double path_expectation(const TabularMG& mg, const MarkovPolicy& mu, const MarkovPolicy& nu,
                        const std::vector<LayerTable>& table) {
  double total = 0.0;
  for_each_path(mg, mu, nu, [&](const std::vector<Step>& path, double p) {
    for (std::size_t h = 0; h < path.size(); ++h)
      total += p * table[h](path[h].x, path[h].a, path[h].b);
  });
  return total;
}

}  // namespace

TEST_CASE("Q* has zero Bellman residual") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Dims d = random_dims(rng, 4, 4, 3, 3);
    const TabularMG mg = gen_random_tabular(d, 0.1, 10 + trial);
    const NashSolution nash = solve_nash(mg);
    const auto rep = residuals(mg, QFunction{nash.q_star, d.horizon + 1.0});
    for (const auto& t : rep.residual)
      for (double v : t.data()) CHECK(std::abs(v) <= 1e-8);

    const MarkovPolicy mu = random_policy(Side::kMax, d, rng);
    const auto br = best_response(mg, mu);
    const auto rep_mu = residuals_mu(mg, QFunction{br.q_br, d.horizon + 1.0}, mu);
    for (const auto& t : rep_mu.residual)
      for (double v : t.data()) CHECK(std::abs(v) <= 1e-10);
  }
}

TEST_CASE("residual expectations use the occupancy") {
  Rng rng(2);
  const Dims d{3, 2, 2, 2};
  const TabularMG mg = gen_random_tabular(d, 0.0, 3);
  const QFunction f = random_qfunction(d, 4.0, rng);
  const MarkovPolicy mu = random_policy(Side::kMax, d, rng);
  const MarkovPolicy nu = random_policy(Side::kMin, d, rng);
  const OccupancyMeasure occ = compute_occupancy(mg, mu, nu);
  const auto rep = residuals(mg, f, &occ);
  REQUIRE(rep.expected.size() == 3);
  double total = 0.0;
  for (double e : rep.expected) total += e;
  CHECK(std::abs(total - path_expectation(mg, mu, nu, rep.residual)) <= 1e-12);
  CHECK(residuals(mg, f).expected.empty());
}

TEST_CASE("main decomposition inequality") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Dims d = random_dims(rng, 3, 3, 3, 3);
    const TabularMG mg = gen_random_tabular(d, 0.0, 100 + trial);
    const NashSolution nash = solve_nash(mg);
    const QFunction f = random_qfunction(d, d.horizon + 1.0, rng);
    const MarkovPolicy nu = random_policy(Side::kMin, d, rng);
    const LemmaCheck c = check_lemma_main(mg, f, nu, nash);
    CHECK(c.ok);
    CHECK(c.slack >= -kLemmaTolerance);
    CHECK(c.slack == doctest::Approx(c.rhs - c.lhs));
    // Independent right-hand side by path enumeration.
    const MarkovPolicy mu = induce_policy(f).mu;
    const double e = path_expectation(mg, mu, nu, residuals(mg, f).residual);
    CHECK(std::abs(c.rhs - (e + nash.value() - induce_policy(f).v[0][mg.initial_state()])) <=
          1e-10);
  }
  // Q* paired with its best response is tight.
  const TabularMG mg = gen_random_tabular(Dims{2, 2, 2, 2}, 0.0, 5);
  const NashSolution nash = solve_nash(mg);
  const QFunction q{nash.q_star, 3.0};
  const auto br = best_response(mg, induce_policy(q).mu);
  const LemmaCheck c = check_lemma_main(mg, q, br.response, nash);
  CHECK(std::abs(c.slack) <= 1e-8);
  CHECK(std::abs(c.lhs) <= 1e-8);
}

TEST_CASE("booster decomposition equality") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Dims d = random_dims(rng, 3, 3, 3, 3);
    const TabularMG mg = gen_random_tabular(d, 0.0, 400 + trial);
    const QFunction f = random_qfunction(d, d.horizon + 1.0, rng);
    const QFunction g = random_qfunction(d, d.horizon + 1.0, rng);
    const LemmaCheck c = check_lemma_booster(mg, f, g);
    CHECK(c.ok);
    CHECK(c.slack <= kLemmaTolerance);

    const MarkovPolicy mu = induce_policy(f).mu;
    const MarkovPolicy nu = booster_response(g, mu);
    const double v_exec = policy_value(mg, mu, nu)[0][mg.initial_state()];
    const double v_br = best_response(mg, mu).value();
    CHECK(std::abs(c.lhs - (v_exec - v_br)) <= 1e-12);
  }
}

TEST_CASE("booster equality by hand on a one-step game") {
  // H = 1: E^mu_1(g) = g - r, so the identity reads
  // mu^T r nu - V^dagger = -(mu^T (g - r) nu) + min_b mu^T g - V^dagger.
  const TabularMG mg = matrix_game({{0.1, 0.6}, {0.7, 0.3}});
  LayerTable g(mg.dims());
  g(0, 0, 0) = 0.9;
  g(0, 0, 1) = 0.2;
  g(0, 1, 0) = 0.4;
  g(0, 1, 1) = 1.1;
  MarkovPolicy mu(Side::kMax, 1, 1, 2);
  mu.row(0, 0)[0] = 0.25;
  mu.row(0, 0)[1] = 0.75;
  // Column values under g: 0.525, 0.875; nu picks column 0.
  const QFunction gq{{g}, 2.0};
  const MarkovPolicy nu = booster_response(gq, mu);
  CHECK(nu.prob(0, 0, 0) == 1.0);
  const LemmaCheck c = check_lemma_booster(mg, mu, nu, gq, residuals_mu(mg, gq, mu));
  const double v_exec = 0.25 * 0.1 + 0.75 * 0.7;
  const double v_br = std::min(v_exec, 0.25 * 0.6 + 0.75 * 0.3);
  CHECK(c.lhs == doctest::Approx(v_exec - v_br).epsilon(1e-14));
  CHECK(c.rhs == doctest::Approx(-(0.525 - v_exec) + 0.525 - v_br).epsilon(1e-14));
  CHECK(c.ok);

  ResidualReport broken = residuals_mu(mg, gq, mu);
  broken.residual[0](0, 0, 0) += 0.5;
  CHECK_FALSE(check_lemma_booster(mg, mu, nu, gq, broken).ok);
}

TEST_CASE("excess-loss moments") {
  SUBCASE("deterministic transitions have zero variance part") {
    const TabularMG mg = chain_game(3, 2, 2);
    Rng rng(5);
    const QFunction f = random_qfunction(mg.dims(), 4.0, rng);
    for (int h = 0; h < 3; ++h) {
      const auto m = excess_loss_moments(mg, f, h, h, 1, 0);
      CHECK(std::abs(m.mean - m.residual_sq) <= 1e-12);
      CHECK(std::abs(m.second_moment - m.residual_sq * m.residual_sq) <= 1e-12);
      CHECK(m.ok);
    }
  }
  SUBCASE("three successors by hand") {
    // One state-action cell with successor values 0, 1, 2 at probabilities 1/2, 1/4, 1/4.
    const Dims d{2, 3, 1, 1};
    std::vector<double> p(2 * 3 * 3, 0.0);
    for (int x = 0; x < 3; ++x) {
      p[x * 3 + 0] = 0.5;
      p[x * 3 + 1] = 0.25;
      p[x * 3 + 2] = 0.25;
      p[9 + x * 3 + x] = 1.0;
    }
    const TabularMG mg(d, 0, {LayerTable(d, 0.25), LayerTable(d, 0.0)}, p);
    LayerTable next(d);
    for (int x = 0; x < 3; ++x) next(x, 0, 0) = x;
    LayerTable first(d, 1.5);
    const QFunction f{{first, next}, 4.0};
    const auto m = excess_loss_moments(mg, f, 0, 0, 0, 0);
    // Z = 1.25 - V(x') takes values 1.25, 0.25, -0.75; EZ = 0.5.
    const double z[3] = {1.25, 0.25, -0.75};
    const double w[3] = {0.5, 0.25, 0.25};
    double mean = 0.0, second = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double dl = z[i] * z[i] - (z[i] - 0.5) * (z[i] - 0.5);
      mean += w[i] * dl;
      second += w[i] * dl * dl;
    }
    CHECK(m.mean == doctest::Approx(mean).epsilon(1e-14));
    CHECK(m.second_moment == doctest::Approx(second).epsilon(1e-14));
    CHECK(m.residual_sq == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(m.ok);
  }
  SUBCASE("random probes satisfy the identity and the bound") {
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
      const Dims d = random_dims(rng, 3, 4, 3, 3);
      const TabularMG mg = gen_random_tabular(d, 0.0, 700 + trial);
      const double beta = d.horizon + 1.0;
      const QFunction f = random_qfunction(d, beta, rng);
      const int h = static_cast<int>(uniform01(rng) * d.horizon);
      const int x = static_cast<int>(uniform01(rng) * d.num_states);
      const int a = static_cast<int>(uniform01(rng) * d.num_a);
      const int b = static_cast<int>(uniform01(rng) * d.num_b);
      const auto m = excess_loss_moments(mg, f, h, x, a, b);
      CHECK(std::abs(m.mean - m.residual_sq) <= 1e-10);
      CHECK(m.second_moment <= 4 * beta * beta / 3 * m.residual_sq + 1e-10);
      const MarkovPolicy mu = random_policy(Side::kMax, d, rng);
      const auto mb = excess_loss_moments(mg, f, mu, h, x, a, b);
      CHECK(mb.ok);
    }
  }
}

TEST_CASE("decoupling trace") {
  SUBCASE("a single episode has an empty history") {
    const Benchmark bm = make_benchmark();
    EpisodeArtifacts ep;
    ep.f_indices = {0, 1};
    ep.g_indices = {2, 0};
    const DcTrace tr = dc_trace(bm.mg, bm.fc, {ep});
    CHECK(tr.T == 1);
    CHECK(tr.rhs_total == 0.0);
    const MarkovPolicy mu = induce_policy(bm.fc.materialize(ep.f_indices)).mu;
    const QFunction g = bm.fc.materialize(ep.g_indices);
    const MarkovPolicy nu = booster_response(g, mu);
    const double e = path_expectation(bm.mg, mu, nu, residuals_mu(bm.mg, g, mu).residual);
    CHECK(std::abs(tr.lhs_total - e) <= 1e-12);
    const auto checks = check_dc(tr, {0.1, 1.0}, dc_bound_linear(8, 2, 1));
    for (const auto& c : checks) CHECK(c.ok);
  }
  SUBCASE("singleton class with best-response closure has zero residuals") {
    const TabularMG mg = gen_random_tabular(Dims{2, 2, 2, 2}, 0.0, 8);
    const NashSolution nash = solve_nash(mg);
    FunctionClass fc;
    fc.dims = mg.dims();
    fc.beta = 3.0;
    for (const auto& q : nash.q_star) fc.layers.push_back({q});
    fc.set_uniform_prior();
    std::vector<EpisodeArtifacts> eps(5);
    for (auto& e : eps) e.f_indices = e.g_indices = {0, 0};
    const DcTrace tr = dc_trace(mg, fc, eps);
    // g = Q* is a fixed point of T^{mu*} since mu* is a Nash policy of Q*.
    CHECK(std::abs(tr.lhs_total) <= 1e-8);
    CHECK(tr.rhs_total <= 1e-14);
  }
  SUBCASE("recorded run holds the certificate and matches brute force") {
    const Benchmark bm = make_benchmark();
    const int T = 200;
    HyperParams hp{1.0 / 36, 0.5, T, 3.0, 11};
    SelfPlayFlags flags;
    flags.record_policies = true;
    const auto run = run_selfplay(bm.mg, bm.fc, hp, flags);
    const DcTrace tr = dc_trace(bm.mg, bm.fc, run.episodes);
    const double K = dc_bound_linear(8, 2, T);
    for (const auto& c : check_dc(tr, {kDcMuGrid.begin(), kDcMuGrid.end()}, K)) {
      CHECK(c.ok);
      CHECK(c.bound == doctest::Approx(c.mu * tr.rhs_total + K / (4 * c.mu)));
    }
    for (int t : {0, 7, 150}) {
      const auto& ep = run.episodes[t];
      const QFunction g = bm.fc.materialize(ep.g_indices);
      const auto res = residuals_mu(bm.mg, g, run.episodes[t].mu);
      for (int h = 0; h < 2; ++h) {
        double inner = 0.0;
        for (int s = 0; s < t; ++s) {
          const OccupancyMeasure occ =
              compute_occupancy(bm.mg, run.episodes[s].mu, run.episodes[s].nu);
          const double e = occ.expect(h, res.residual[h]);
          inner += e * e;
        }
        CHECK(std::abs(tr.rhs_inner[t * 2 + h] - inner) <= 1e-10);
      }
    }
    std::ostringstream os;
    write_dc_csv(os, tr);
    const std::string csv = os.str();
    CHECK(csv.rfind("t,h,lhs_term,rhs_inner\n1,1,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * T);
  }
  SUBCASE("errors") {
    const Benchmark bm = make_benchmark();
    EpisodeArtifacts ep;
    CHECK_THROWS_AS(dc_trace(bm.mg, bm.fc, {ep}), std::invalid_argument);
    CHECK_THROWS_AS(check_dc(DcTrace{}, {0.0}, 1.0), std::invalid_argument);
  }
}

TEST_CASE("linear decoupling constant") {
  CHECK(dc_bound_linear(1, 1, 1) == doctest::Approx(2.0 * (2.0 + std::log(2.0))));
  CHECK(std::abs(dc_bound_linear(1, 1, 1) - 5.3863) <= 1e-4);
  CHECK(dc_bound_linear(8, 2, 2000) ==
        doctest::Approx(2.0 * 8 * 2 * (2.0 + std::log(8000.0))).epsilon(1e-15));
  CHECK_THROWS_AS(dc_bound_linear(0, 1, 1), std::invalid_argument);
}

TEST_CASE("elliptical potential sandwich") {
  const std::vector<std::vector<double>> id2{{1, 0}, {0, 1}};
  SUBCASE("single basis vector") {
    const auto c = elliptical_potential_check({{1.0, 0.0}}, id2);
    CHECK(c.log_det_ratio == doctest::Approx(std::log(2.0)));
    CHECK(c.quad_sum == doctest::Approx(1.0));
    CHECK(c.ok);
  }
  SUBCASE("empty sequence") {
    const auto c = elliptical_potential_check({}, id2);
    CHECK(c.log_det_ratio == 0.0);
    CHECK(c.quad_sum == 0.0);
    CHECK(c.ok);
  }
  SUBCASE("random vectors in the unit ball") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = 1 + static_cast<int>(uniform01(rng) * 6);
      std::vector<std::vector<double>> vs(100, std::vector<double>(d));
      for (auto& v : vs) {
        double n2 = 0.0;
        for (double& x : v) {
          x = 2.0 * uniform01(rng) - 1.0;
          n2 += x * x;
        }
        const double scale = uniform01(rng) / std::sqrt(n2);
        for (double& x : v) x *= scale;
      }
      std::vector<std::vector<double>> l0(d, std::vector<double>(d, 0.0));
      for (int i = 0; i < d; ++i) l0[i][i] = 1.0 + trial;
      CHECK(elliptical_potential_check(vs, l0).ok);
    }
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(elliptical_potential_check({{1.0, 1.0}}, id2), std::invalid_argument);
    CHECK_THROWS_AS(elliptical_potential_check({}, {{0.5, 0}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(elliptical_potential_check({}, {{1, 0.5}, {0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(elliptical_potential_check({{1.0}}, id2), std::invalid_argument);
  }
}
