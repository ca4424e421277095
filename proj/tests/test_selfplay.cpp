#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "test_support.hpp"
#include "zsmg/instances.hpp"
#include "zsmg/selfplay.hpp"

using namespace zsmg;
using namespace zsmg::testing;

namespace {

FunctionClass singleton(const std::vector<LayerTable>& q, const Dims& d, double beta) {
  FunctionClass fc;
  fc.dims = d;
  fc.beta = beta;
  for (const auto& layer : q) fc.layers.push_back({layer});
  fc.set_uniform_prior();
  return fc;
}

}  // namespace

TEST_CASE("default hyperparameters") {
  const HyperParams hp = default_hyperparams(2.0, 100, std::log(64.0), 10.0);
  CHECK(hp.eta == 0.0625);
  const double lambda = std::sqrt(100.0 * std::log(64.0) / (4.0 * 10.0));
  CHECK(std::abs(hp.lambda - lambda) <= 1e-12);
  CHECK(std::abs(hp.lambda - 3.2245) <= 1e-4);
  CHECK(hp.validate(true).empty());

  std::vector<std::string> notices;
  const HyperParams low = default_hyperparams(3.0, 1, 1e-6, 100.0, &notices);
  CHECK(low.lambda == 1.0 / 9.0);
  REQUIRE(notices.size() == 1);
  CHECK(notices[0].find("raised") != std::string::npos);

  CHECK_THROWS_AS(default_hyperparams(0.0, 10, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(default_hyperparams(2.0, 0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(default_hyperparams(2.0, 10, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("hyperparameter validation") {
  HyperParams hp{0.5, 0.01, 10, 2.0, 1};
  const auto warnings = hp.validate(false);
  CHECK(warnings.size() == 2);
  CHECK_THROWS_AS(hp.validate(true), ValidationError);
  hp.eta = 0.0;
  CHECK_THROWS_AS(hp.validate(false), ValidationError);
  hp.eta = 0.1;
  hp.lambda = -1.0;
  CHECK_THROWS_AS(hp.validate(false), ValidationError);
  hp.lambda = 1.0;
  hp.T = 0;
  CHECK_THROWS_AS(hp.validate(false), ValidationError);
  hp.T = 1;
  hp.beta = 1.0;
  CHECK_THROWS_AS(hp.validate(false), ValidationError);
}

TEST_CASE("episode evaluation identity") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Dims d = random_dims(rng, 3, 3, 3, 3);
    const TabularMG mg = gen_random_tabular(d, 0.0, 300 + trial);
    const NashSolution nash = solve_nash(mg);
    const MarkovPolicy mu = random_policy(Side::kMax, d, rng);
    const MarkovPolicy nu = random_policy(Side::kMin, d, rng);
    const RegretRecord r = evaluate_episode(mg, mu, nu, nash, 4, 1.5);
    CHECK(r.episode == 4);
    CHECK(r.inst_regret == r.main_gap + r.booster_gap);
    CHECK(std::abs(r.inst_regret - (r.v_star - r.v_br)) <= 1e-12);
    CHECK(r.cum_regret == 1.5 + r.inst_regret);
    CHECK(r.booster_gap >= -1e-10);
    CHECK(r.v_star - r.v_br >= -1e-8);

    const RegretRecord br = evaluate_episode(mg, mu, best_response(mg, mu).response, nash);
    CHECK(std::abs(br.booster_gap) <= 1e-12);
  }
}

TEST_CASE("booster response is a pure argmin") {
  const TabularMG mg = matrix_game({{0.2, 0.9, 0.4}, {0.8, 0.1, 0.4}});
  QFunction g{{mg.reward(0)}, 2.0};
  MarkovPolicy mu(Side::kMax, 1, 1, 2);
  mu.row(0, 0)[0] = 0.5;
  mu.row(0, 0)[1] = 0.5;
  // Column values 0.5, 0.5, 0.4.
  CHECK(booster_response(g, mu).prob(0, 0, 2) == 1.0);
  mu.set_pure(0, 0, 0);
  CHECK(booster_response(g, mu).prob(0, 0, 0) == 1.0);
}

TEST_CASE("singleton class containing Q* has zero regret") {
  Rng rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Dims d{3, 3, 2, 2};
    const TabularMG mg = gen_random_tabular(d, 0.0, 500 + trial);
    const NashSolution nash = solve_nash(mg);
    const FunctionClass fc = singleton(nash.q_star, d, d.horizon + 1.0);
    HyperParams hp{0.05, 0.2, 200, fc.beta, static_cast<std::uint64_t>(trial)};
    const SelfPlayResult res = run_selfplay(mg, fc, hp);
    REQUIRE(res.records.size() == 200);
    CHECK(std::abs(res.records.back().cum_regret) <= 1e-6);
    for (const auto& w : res.warnings) CHECK(w.find("Q*") == std::string::npos);
  }
}

TEST_CASE("missing Q* is reported") {
  const Dims d{2, 2, 2, 2};
  const TabularMG mg = gen_random_tabular(d, 0.0, 9);
  FunctionClass fc = singleton({LayerTable(d, 0.5), LayerTable(d, 0.5)}, d, 3.0);
  HyperParams hp{0.05, 0.2, 3, 3.0, 0};
  const auto res = run_selfplay(mg, fc, hp);
  bool found = false;
  for (const auto& w : res.warnings) found |= w == "Q* is not in the class";
  CHECK(found);
}

TEST_CASE("self-play is deterministic given the seed") {
  const Benchmark bm = make_benchmark();
  HyperParams hp{1.0 / 36, 0.5, 60, 3.0, 17};
  SelfPlayFlags flags;
  flags.record_policies = true;
  flags.dump_posterior = true;
  const auto a = run_selfplay(bm.mg, bm.fc, hp, flags);
  const auto b = run_selfplay(bm.mg, bm.fc, hp, flags);
  std::ostringstream sa, sb;
  write_regret_csv(sa, a.records);
  write_regret_csv(sb, b.records);
  CHECK(sa.str() == sb.str());
  CHECK(a.main_posterior_csv == b.main_posterior_csv);
  CHECK(a.booster_posterior_csv == b.booster_posterior_csv);
  for (std::size_t t = 0; t < a.episodes.size(); ++t) {
    CHECK(a.episodes[t].f_indices == b.episodes[t].f_indices);
    CHECK(a.episodes[t].trajectory == b.episodes[t].trajectory);
  }
  hp.seed = 18;
  std::ostringstream sc;
  write_regret_csv(sc, run_selfplay(bm.mg, bm.fc, hp).records);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("records and artifacts are consistent") {
  const Benchmark bm = make_benchmark();
  HyperParams hp{1.0 / 36, 0.5, 30, 3.0, 3};
  SelfPlayFlags flags;
  flags.record_policies = true;
  const auto res = run_selfplay(bm.mg, bm.fc, hp, flags);
  const NashSolution nash = solve_nash(bm.mg);
  double cum = 0.0;
  for (int t = 0; t < 30; ++t) {
    const auto& art = res.episodes[t];
    const auto& rec = res.records[t];
    CHECK(rec.episode == t + 1);
    CHECK(art.trajectory.episode == t + 1);
    CHECK(art.trajectory.steps.size() == 2);
    const QFunction f = bm.fc.materialize(art.f_indices);
    CHECK(art.mu == induce_policy(f).mu);
    CHECK(art.nu == booster_response(bm.fc.materialize(art.g_indices), art.mu));
    const RegretRecord check = evaluate_episode(bm.mg, art.mu, art.nu, nash, t + 1, cum);
    CHECK(check.inst_regret == rec.inst_regret);
    cum = check.cum_regret;
    CHECK(rec.cum_regret == cum);
  }
}

TEST_CASE("no optimism and tiny learning rate keep the prior") {
  // With lambda = 0 and eta tiny, f_t is close to a prior draw at every t.
  const Benchmark bm = make_benchmark();
  HyperParams hp{1e-12, 0.0, 4000, 3.0, 5};
  const auto res = run_selfplay(bm.mg, bm.fc, hp);
  std::vector<int> counts(bm.fc.size(0), 0);
  for (const auto& e : res.episodes) ++counts[e.f_indices[0]];
  const double n = 4000, p = 1.0 / bm.fc.size(0);
  for (int c : counts) CHECK(std::abs(c - n * p) <= 4.0 * std::sqrt(n * p * (1 - p)));
}

TEST_CASE("regret CSV format") {
  RegretRecord r{1, 0.5, 0.25, 0.125, 0.25, 0.125, 0.375, 0.375};
  std::ostringstream os;
  write_regret_csv(os, {r});
  CHECK(os.str() ==
        "episode,v_star,v_exec,v_br,main_gap,booster_gap,inst_regret,cum_regret\n"
        "1,0.5,0.25,0.125,0.25,0.125,0.375,0.375\n");
}

TEST_CASE("mismatched class is rejected") {
  const TabularMG mg = gen_random_tabular(Dims{2, 2, 2, 2}, 0.0, 1);
  const FunctionClass fc = singleton({LayerTable(Dims{2, 2, 2, 3}), LayerTable(Dims{2, 2, 2, 3})},
                                     Dims{2, 2, 2, 3}, 3.0);
  CHECK_THROWS_AS(run_selfplay(mg, fc, HyperParams{0.05, 0.2, 2, 3.0, 0}), DimensionError);
}
