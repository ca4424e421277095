// zsmg: generate games, solve them, run self-play, and check diagnostics.
// Exit codes: 0 success, 1 check failure, 2 configuration error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "zsmg/diagnostics.hpp"
#include "zsmg/instances.hpp"
#include "zsmg/io.hpp"
#include "zsmg/oracle.hpp"
#include "zsmg/selfplay.hpp"

namespace fs = std::filesystem;
using namespace zsmg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

// Configuration problems detected after parsing.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out;
  bool strict = false;
};

fs::path out_dir(const GlobalOptions& g) { return g.out.empty() ? fs::path(".") : fs::path(g.out); }

struct GenOptions {
  bool tabular = false;
  bool linear = false;
  bool benchmark = false;
  int H = 2;
  int states = 2;
  std::vector<int> actions{2, 2};
  int initial_state = 0;
  double sparsity = 0.0;
  int d = 0;
  bool one_hot = false;
  std::string class_out;
  int closure_seeds = 0;
  int depth = 0;
  int truncate = 0;
  double beta = 0.0;
};

int cmd_gen(const GenOptions& o, const GlobalOptions& g) {
  if (o.tabular + o.linear + o.benchmark != 1)
    throw ConfigError("gen needs exactly one of --tabular, --linear, --benchmark");
  const fs::path out = g.out.empty() ? fs::path("instance.json") : fs::path(g.out);

  if (o.benchmark) {
    const Benchmark bm = make_benchmark();
    write_text_file(out, canonical_dump(game_to_json(bm.mg)));
    const fs::path cls = o.class_out.empty() ? out.parent_path() / "class.json" : fs::path(o.class_out);
    write_text_file(cls, canonical_dump(class_to_json(bm.fc)));
    std::cout << "wrote " << out.string() << " and " << cls.string() << "\n";
    return kExitOk;
  }

  if (o.actions.size() != 2) throw ConfigError("--actions takes two values");
  const Dims dims{o.H, o.states, o.actions[0], o.actions[1]};
  std::optional<TabularMG> mg;
  if (o.tabular) {
    mg = gen_random_tabular(dims, o.sparsity, g.seed, o.initial_state);
  } else {
    const int d = o.one_hot ? dims.cells() : o.d;
    if (d < 1) throw ConfigError("--linear needs --d or --one-hot");
    auto [game, spec] = gen_linear_mg(dims, d, g.seed,
                                      o.one_hot ? LinearFeatures::kOneHot : LinearFeatures::kDirichlet,
                                      o.initial_state);
    write_text_file(out.parent_path() / "linear_spec.json", canonical_dump(linear_spec_to_json(spec)));
    mg = std::move(game);
  }
  write_text_file(out, canonical_dump(game_to_json(*mg)));
  std::cout << "wrote " << out.string() << "\n";

  if (!o.class_out.empty()) {
    Rng rng(g.seed ^ 0x9e3779b97f4a7c15ULL);
    ClosureOptions co;
    co.depth = o.depth;
    co.truncate_per_layer = static_cast<std::size_t>(o.truncate);
    co.beta = o.beta;
    const double beta = o.beta > 0.0 ? o.beta : dims.horizon + 1.0;
    // Step-h seed entries stay in the reachable value range [0, H - h], so
    // closure backups of any depth remain inside it.
    std::vector<QFunction> seeds;
    for (int i = 0; i < o.closure_seeds; ++i) {
      QFunction f = random_qfunction(dims, beta, rng);
      for (int h = 0; h < dims.horizon; ++h) {
        const double top = std::min<double>(dims.horizon - h, beta - 1.0);
        for (double& v : f.layers[h].data()) v *= top / (beta - 1.0);
      }
      seeds.push_back(std::move(f));
    }
    const ClosureResult cr = build_closure_class(*mg, seeds, co);
    write_text_file(o.class_out, canonical_dump(class_to_json(cr.fc)));
    std::cout << "wrote " << o.class_out << " (completeness defect "
              << format_double(cr.defect.value) << ")\n";
  }
  return kExitOk;
}

int cmd_solve(const std::string& instance, const GlobalOptions& g) {
  const TabularMG mg = game_from_json(read_json_file(instance));
  const NashSolution nash = solve_nash(mg);
  write_text_file(out_dir(g) / "nash.json", canonical_dump(nash_to_json(nash)));
  std::cout << format_double(nash.value()) << "\n";
  return kExitOk;
}

int cmd_kappa(const std::string& instance, const std::string& cls, std::vector<double> eps,
              int T, const GlobalOptions& g) {
  const TabularMG mg = game_from_json(read_json_file(instance));
  const FunctionClass fc = class_from_json(read_json_file(cls));
  if (!(fc.dims == mg.dims())) throw ConfigError("class does not match the instance");
  if (eps.empty()) eps.push_back(fc.beta / (static_cast<double>(T) * T));
  Json report;
  report["completeness_defect"] = completeness_defect(mg, fc).value;
  report["log_class_size"] = std::log(fc.joint_size());
  Json rows = Json::array();
  for (double e : eps) {
    const KappaResult k = compute_kappa(mg, fc, e);
    Json row;
    row["epsilon"] = e;
    // JSON has no infinity; null marks an empty set.
    row["kappa"] = std::isfinite(k.kappa) ? Json(k.kappa) : Json(nullptr);
    row["kappa1"] = std::isfinite(k.kappa1) ? Json(k.kappa1) : Json(nullptr);
    std::cout << "epsilon=" << format_double(e) << " kappa=" << format_double(k.kappa)
              << " kappa1=" << format_double(k.kappa1);
    if (k.offender) {
      row["offender"] = {{"h", k.offender->h + 1},
                         {"policy_member", k.offender->policy_member},
                         {"g_member", k.offender->g_member}};
      std::cout << " (empty set at h=" << k.offender->h + 1 << ", f=" << k.offender->policy_member
                << ", g=" << k.offender->g_member << ")";
    }
    std::cout << "\n";
    rows.push_back(std::move(row));
  }
  report["results"] = std::move(rows);
  write_text_file(out_dir(g) / "kappa.json", canonical_dump(report));
  return kExitOk;
}

struct DiagSummary {
  Json report;
  bool passed = true;
};

void add_lemma_section(DiagSummary& s, const char* name, const std::vector<LemmaCheck>& checks,
                       bool equality) {
  Json j;
  j["checks"] = checks.size();
  bool ok = true;
  double extremal = equality ? 0.0 : kInf;
  for (const auto& c : checks) {
    ok = ok && c.ok;
    extremal = equality ? std::max(extremal, c.slack) : std::min(extremal, c.slack);
  }
  j["passed"] = ok;
  j[equality ? "max_abs_error" : "min_slack"] = checks.empty() ? Json(nullptr) : Json(extremal);
  s.report[name] = std::move(j);
  s.passed = s.passed && ok;
}

void add_moment_section(DiagSummary& s, const std::vector<ExcessLossMoments>& moments) {
  Json j;
  bool ok = true;
  double worst_mean = 0.0;
  double worst_ratio = 0.0;
  for (const auto& m : moments) {
    ok = ok && m.ok;
    worst_mean = std::max(worst_mean, std::abs(m.mean - m.residual_sq));
    if (m.residual_sq > 0.0) worst_ratio = std::max(worst_ratio, m.second_moment / m.residual_sq);
  }
  j["checks"] = moments.size();
  j["passed"] = ok;
  j["max_mean_error"] = worst_mean;
  j["max_second_moment_ratio"] = worst_ratio;
  s.report["excess_loss"] = std::move(j);
  s.passed = s.passed && ok;
}

void add_dc_section(DiagSummary& s, const DcTrace& trace, double K) {
  Json j;
  j["label"] = "realized-trace dc check";
  j["K"] = K;
  j["lhs"] = trace.lhs_total;
  j["rhs"] = trace.rhs_total;
  Json rows = Json::array();
  bool ok = true;
  for (const auto& c : check_dc(trace, {kDcMuGrid.begin(), kDcMuGrid.end()}, K)) {
    rows.push_back({{"mu", c.mu}, {"lhs", c.lhs}, {"bound", c.bound}, {"ok", c.ok}});
    ok = ok && c.ok;
  }
  j["mu"] = std::move(rows);
  j["passed"] = ok;
  s.report["dc"] = std::move(j);
  s.passed = s.passed && ok;
}

// Lemma and moment checks over every distinct (f_t, g_t) of a run, plus the
// decoupling trace.
DiagSummary diagnose_run(const TabularMG& mg, const FunctionClass& fc,
                         const std::vector<EpisodeArtifacts>& episodes, bool inject_fault,
                         std::string* dc_csv) {
  DiagSummary s;
  const NashSolution nash = solve_nash(mg);
  std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
  std::vector<LemmaCheck> main_checks;
  std::vector<LemmaCheck> booster_checks;
  std::vector<ExcessLossMoments> moments;
  const Dims& d = mg.dims();
  for (const auto& ep : episodes) {
    if (!seen.insert({ep.f_indices, ep.g_indices}).second) continue;
    const QFunction f = fc.materialize(ep.f_indices);
    const QFunction g = fc.materialize(ep.g_indices);
    const MarkovPolicy mu = induce_policy(f).mu;
    const MarkovPolicy nu = booster_response(g, mu);
    main_checks.push_back(check_lemma_main(mg, f, nu, nash));
    ResidualReport res = residuals_mu(mg, g, mu);
    if (inject_fault)
      for (int a = 0; a < d.num_a; ++a)
        for (int b = 0; b < d.num_b; ++b) res.residual[0](mg.initial_state(), a, b) += 0.5;
    booster_checks.push_back(check_lemma_booster(mg, mu, nu, g, res));
    for (int h = 0; h < d.horizon; ++h)
      for (int x = 0; x < d.num_states; ++x)
        for (int a = 0; a < d.num_a; ++a)
          for (int b = 0; b < d.num_b; ++b) {
            moments.push_back(excess_loss_moments(mg, f, h, x, a, b));
            moments.push_back(excess_loss_moments(mg, g, mu, h, x, a, b));
          }
  }
  add_lemma_section(s, "lemma_main", main_checks, false);
  add_lemma_section(s, "lemma_booster", booster_checks, true);
  add_moment_section(s, moments);

  const DcTrace trace = dc_trace(mg, fc, episodes);
  add_dc_section(s, trace, dc_bound_linear(d.cells(), d.horizon, static_cast<int>(episodes.size())));
  if (dc_csv) {
    std::ostringstream os;
    write_dc_csv(os, trace);
    *dc_csv = os.str();
  }
  s.report["passed"] = s.passed;
  return s;
}

MarkovPolicy random_policy(Side side, const Dims& dims, Rng& rng) {
  MarkovPolicy p(side, dims.horizon, dims.num_states, side == Side::kMax ? dims.num_a : dims.num_b);
  for (int h = 0; h < dims.horizon; ++h)
    for (int x = 0; x < dims.num_states; ++x) {
      auto row = p.row(h, x);
      double total = 0.0;
      for (double& v : row) {
        v = -std::log(1.0 - uniform01(rng));
        total += v;
      }
      for (double& v : row) v /= total;
    }
  return p;
}

// Fresh random (f, g, nu) probes on one instance.
DiagSummary diagnose_probes(const TabularMG& mg, int probes, double beta, bool inject_fault,
                            Rng& rng) {
  DiagSummary s;
  const NashSolution nash = solve_nash(mg);
  const Dims& d = mg.dims();
  std::vector<LemmaCheck> main_checks;
  std::vector<LemmaCheck> booster_checks;
  std::vector<ExcessLossMoments> moments;
  for (int i = 0; i < probes; ++i) {
    const QFunction f = random_qfunction(d, beta, rng);
    const QFunction g = random_qfunction(d, beta, rng);
    main_checks.push_back(check_lemma_main(mg, f, random_policy(Side::kMin, d, rng), nash));
    const MarkovPolicy mu = induce_policy(f).mu;
    const MarkovPolicy nu = booster_response(g, mu);
    ResidualReport res = residuals_mu(mg, g, mu);
    if (inject_fault)
      for (int a = 0; a < d.num_a; ++a)
        for (int b = 0; b < d.num_b; ++b) res.residual[0](mg.initial_state(), a, b) += 0.5;
    booster_checks.push_back(check_lemma_booster(mg, mu, nu, g, res));
    const int h = static_cast<int>(uniform01(rng) * d.horizon);
    const int x = static_cast<int>(uniform01(rng) * d.num_states);
    const int a = static_cast<int>(uniform01(rng) * d.num_a);
    const int b = static_cast<int>(uniform01(rng) * d.num_b);
    moments.push_back(excess_loss_moments(mg, f, h, x, a, b));
    moments.push_back(excess_loss_moments(mg, g, mu, h, x, a, b));
  }
  add_lemma_section(s, "lemma_main", main_checks, false);
  add_lemma_section(s, "lemma_booster", booster_checks, true);
  add_moment_section(s, moments);

  Json ell;
  bool ok = true;
  const int dim = 4;
  std::vector<std::vector<double>> identity(dim, std::vector<double>(dim, 0.0));
  for (int i = 0; i < dim; ++i) identity[i][i] = 1.0;
  for (int i = 0; i < probes; ++i) {
    std::vector<std::vector<double>> vs(20, std::vector<double>(dim));
    for (auto& v : vs) {
      double n2 = 0.0;
      for (double& c : v) {
        c = 2.0 * uniform01(rng) - 1.0;
        n2 += c * c;
      }
      const double scale = uniform01(rng) / std::sqrt(std::max(n2, 1e-300));
      for (double& c : v) c *= scale;
    }
    ok = ok && elliptical_potential_check(vs, identity).ok;
  }
  ell["checks"] = probes;
  ell["passed"] = ok;
  s.report["elliptical"] = std::move(ell);
  s.passed = s.passed && ok;
  s.report["passed"] = s.passed;
  return s;
}

struct RunOptions {
  std::string instance;
  std::string cls;
  int T = 100;
  std::vector<std::uint64_t> seeds;
  std::string hyper = "auto";
  std::optional<double> eta;
  std::optional<double> lambda;
  std::optional<double> beta;
  std::optional<double> kappa;
  std::optional<double> dc;
  bool diag = false;
  bool dump_posterior = false;
  int workers = 0;
};

Json trace_to_json(const std::vector<EpisodeArtifacts>& episodes) {
  Json f = Json::array();
  Json g = Json::array();
  for (const auto& e : episodes) {
    f.push_back(e.f_indices);
    g.push_back(e.g_indices);
  }
  return {{"f", std::move(f)}, {"g", std::move(g)}};
}

std::vector<EpisodeArtifacts> trace_from_json(const Json& j, int H) {
  if (!j.contains("f") || !j.contains("g") || j["f"].size() != j["g"].size())
    throw ValidationError("trace.json must hold equal-length \"f\" and \"g\" arrays");
  std::vector<EpisodeArtifacts> out(j["f"].size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t].f_indices = j["f"][t].get<std::vector<int>>();
    out[t].g_indices = j["g"][t].get<std::vector<int>>();
    if (static_cast<int>(out[t].f_indices.size()) != H ||
        static_cast<int>(out[t].g_indices.size()) != H)
      throw ValidationError("trace.json entries must have one index per step");
  }
  return out;
}

struct SeedOutcome {
  std::vector<RegretRecord> records;
  bool passed = true;
  std::string error;
};

int cmd_run(const RunOptions& o, const GlobalOptions& g) {
  const Json instance_json = read_json_file(o.instance);
  const Json class_json = read_json_file(o.cls);
  const TabularMG mg = game_from_json(instance_json);
  FunctionClass fc = class_from_json(class_json);
  if (!(fc.dims == mg.dims())) throw ConfigError("class does not match the instance");
  if (o.beta) {
    fc.beta = *o.beta;
    fc.validate();
  }
  if (o.T < 1) throw ConfigError("--T must be at least 1");

  std::vector<std::uint64_t> seeds = o.seeds.empty() ? std::vector<std::uint64_t>{g.seed} : o.seeds;
  {
    std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  }

  HyperParams hp;
  std::vector<std::string> notices;
  Json hyper_meta;
  if (o.hyper == "auto") {
    double kappa = 0.0;
    std::string kappa_source;
    if (o.kappa) {
      kappa = *o.kappa;
      kappa_source = "override";
    } else {
      const double eps = fc.beta / (static_cast<double>(o.T) * o.T);
      kappa = compute_kappa(mg, fc, eps).kappa;
      kappa_source = "exact";
      if (!std::isfinite(kappa)) {
        kappa = std::log(fc.joint_size());
        kappa_source = "log_class_size";
        notices.push_back("kappa(beta/T^2) is infinite; using ln|F| = " + format_double(kappa));
      }
    }
    const double dc = o.dc ? *o.dc : dc_bound_linear(mg.dims().cells(), mg.horizon(), o.T);
    if (kappa > 0.0) {
      hp = default_hyperparams(fc.beta, o.T, kappa, dc, &notices);
    } else {
      // A single-member class has ln|F| = 0; only the lambda floor remains.
      hp.beta = fc.beta;
      hp.T = o.T;
      hp.eta = 1.0 / (4.0 * fc.beta * fc.beta);
      hp.lambda = 1.0 / (fc.beta * fc.beta);
      notices.push_back("kappa is 0; lambda set to 1/beta^2");
    }
    hyper_meta["kappa"] = kappa;
    hyper_meta["kappa_source"] = kappa_source;
    hyper_meta["dc"] = dc;
  } else if (o.hyper == "manual") {
    if (!o.eta || !o.lambda) throw ConfigError("--hyper manual needs --eta and --lambda");
    hp.eta = *o.eta;
    hp.lambda = *o.lambda;
    hp.beta = fc.beta;
    hp.T = o.T;
  } else {
    throw ConfigError("--hyper must be auto or manual");
  }
  for (const auto& w : hp.validate(g.strict)) notices.push_back(w);
  for (const auto& n : notices) std::cerr << "notice: " << n << "\n";
  std::cout << "eta=" << format_double(hp.eta) << " lambda=" << format_double(hp.lambda) << "\n";

  hyper_meta["mode"] = o.hyper;
  hyper_meta["eta"] = hp.eta;
  hyper_meta["lambda"] = hp.lambda;
  hyper_meta["beta"] = hp.beta;
  hyper_meta["T"] = hp.T;

  const fs::path root = out_dir(g);
  const std::string instance_text = canonical_dump(instance_json);
  const std::string class_text = canonical_dump(class_to_json(fc));

  std::vector<SeedOutcome> outcomes(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      SeedOutcome& out = outcomes[i];
      try {
        const fs::path dir =
            seeds.size() == 1 ? root : root / ("seed_" + std::to_string(seeds[i]));
        HyperParams local = hp;
        local.seed = seeds[i];
        SelfPlayFlags flags;
        flags.dump_posterior = o.dump_posterior;
        const SelfPlayResult res = run_selfplay(mg, fc, local, flags);
        for (const auto& r : res.records)
          if (r.inst_regret < -1e-8 || r.booster_gap < -1e-8) out.passed = false;

        std::ostringstream csv;
        write_regret_csv(csv, res.records);
        write_text_file(dir / "regret.csv", csv.str());
        write_text_file(dir / "instance.json", instance_text);
        write_text_file(dir / "class.json", class_text);
        write_text_file(dir / "trace.json", canonical_dump(trace_to_json(res.episodes)));
        if (o.dump_posterior) {
          write_text_file(dir / "posterior_main.csv", res.main_posterior_csv);
          write_text_file(dir / "posterior_booster.csv", res.booster_posterior_csv);
        }
        Json meta;
        meta["seed"] = seeds[i];
        meta["hyper"] = hyper_meta;
        meta["instance_hash"] = fnv1a_hex(instance_text);
        meta["class_hash"] = fnv1a_hex(class_text);
        meta["class_sizes"] = [&] {
          std::vector<int> s;
          for (int h = 0; h < fc.dims.horizon; ++h) s.push_back(fc.size(h));
          return s;
        }();
        meta["warnings"] = res.warnings;
        meta["diag"] = o.diag;
        meta["final_cum_regret"] = res.records.back().cum_regret;
        write_text_file(dir / "run_meta.json", canonical_dump(meta));

        if (o.diag) {
          std::string dc_csv;
          const DiagSummary s = diagnose_run(mg, fc, res.episodes, false, &dc_csv);
          write_text_file(dir / "diag.csv", dc_csv);
          write_text_file(dir / "lemma_report.json", canonical_dump(s.report));
          out.passed = out.passed && s.passed;
        }
        out.records = res.records;
      } catch (const std::exception& e) {
        out.error = e.what();
        out.passed = false;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers =
      std::min<std::size_t>(seeds.size(), o.workers > 0 ? o.workers : hw);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i + 1 < n_workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool passed = true;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].error.empty()) {
      std::cerr << "seed " << seeds[i] << ": " << outcomes[i].error << "\n";
      return kExitConfig;
    }
    passed = passed && outcomes[i].passed;
    std::cout << "seed " << seeds[i]
              << " cum_regret=" << format_double(outcomes[i].records.back().cum_regret) << "\n";
  }

  if (seeds.size() > 1) {
    const std::size_t n = seeds.size();
    std::vector<double> mean(o.T, 0.0), stderr_(o.T, 0.0), mean_inst(o.T, 0.0);
    for (int t = 0; t < o.T; ++t) {
      for (const auto& oc : outcomes) {
        mean[t] += oc.records[t].cum_regret / n;
        mean_inst[t] += oc.records[t].inst_regret / n;
      }
      double ss = 0.0;
      for (const auto& oc : outcomes) ss += std::pow(oc.records[t].cum_regret - mean[t], 2);
      stderr_[t] = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
    Json summary;
    summary["seeds"] = seeds;
    summary["T"] = o.T;
    summary["mean_cum_regret"] = mean;
    summary["stderr_cum_regret"] = stderr_;
    summary["mean_inst_regret"] = mean_inst;
    write_text_file(root / "summary.json", canonical_dump(summary));
  }
  return passed ? kExitOk : kExitCheckFailed;
}

struct DiagOptions {
  std::string run_dir;
  std::string instance;
  int probes = 50;
  double beta = 0.0;
  bool inject_fault = false;
};

int cmd_diag(const DiagOptions& o, const GlobalOptions& g) {
  DiagSummary s;
  if (!o.run_dir.empty()) {
    const fs::path dir(o.run_dir);
    const TabularMG mg = game_from_json(read_json_file(dir / "instance.json"));
    const FunctionClass fc = class_from_json(read_json_file(dir / "class.json"));
    const auto episodes = trace_from_json(read_json_file(dir / "trace.json"), mg.horizon());
    if (episodes.empty()) throw ConfigError("trace.json holds no episodes");
    std::string dc_csv;
    s = diagnose_run(mg, fc, episodes, o.inject_fault, &dc_csv);
    write_text_file(out_dir(g) / "diag.csv", dc_csv);
  } else if (!o.instance.empty()) {
    const TabularMG mg = game_from_json(read_json_file(o.instance));
    Rng rng(g.seed);
    s = diagnose_probes(mg, o.probes, o.beta > 0.0 ? o.beta : mg.horizon() + 1.0, o.inject_fault,
                        rng);
  } else {
    throw ConfigError("diag needs --run-dir or --instance");
  }
  write_text_file(out_dir(g) / "lemma_report.json", canonical_dump(s.report));
  std::cout << (s.passed ? "all checks passed" : "check failure") << "\n";
  return s.passed ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior-sampling self-play lab for zero-sum Markov games"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--out", g.out, "output file (gen) or directory");
  app.add_flag("--strict", g.strict, "treat hyperparameter warnings as errors");

  GenOptions go;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_flag("--tabular", go.tabular, "random tabular game");
  gen->add_flag("--linear", go.linear, "random linear game");
  gen->add_flag("--benchmark", go.benchmark, "fixed 2-state benchmark with its class");
  gen->add_option("--H", go.H, "horizon")->check(CLI::PositiveNumber);
  gen->add_option("--states", go.states, "number of states")->check(CLI::PositiveNumber);
  gen->add_option("--actions", go.actions, "|A| |B|")->expected(2);
  gen->add_option("--initial-state", go.initial_state, "initial state index");
  gen->add_option("--sparsity", go.sparsity, "probability of zeroing a reward");
  gen->add_option("--d", go.d, "feature dimension (linear)");
  gen->add_flag("--one-hot", go.one_hot, "one-hot features, d = |X||A||B|");
  gen->add_option("--class-out", go.class_out, "also write a closure class here");
  gen->add_option("--closure-seeds", go.closure_seeds, "random seed functions for the class");
  gen->add_option("--depth", go.depth, "closure depth");
  gen->add_option("--truncate", go.truncate, "members kept per layer (0 keeps all)");
  gen->add_option("--beta", go.beta, "class bound beta (default H+1)");

  std::string solve_instance;
  auto* solve = app.add_subcommand("solve", "solve for the Nash value");
  solve->add_option("--instance", solve_instance, "instance JSON")->required();

  std::string k_instance, k_class;
  std::vector<double> k_eps;
  int k_T = 100;
  auto* kappa = app.add_subcommand("kappa", "exact kappa(eps) of a finite class");
  kappa->add_option("--instance", k_instance, "instance JSON")->required();
  kappa->add_option("--class", k_class, "class JSON")->required();
  kappa->add_option("--epsilon", k_eps, "epsilon values (default beta/T^2)");
  kappa->add_option("--T", k_T, "episodes for the default epsilon")->check(CLI::PositiveNumber);

  RunOptions ro;
  auto* run = app.add_subcommand("run", "self-play runs");
  run->add_option("--instance", ro.instance, "instance JSON")->required();
  run->add_option("--class", ro.cls, "class JSON")->required();
  run->add_option("--T", ro.T, "episodes")->check(CLI::PositiveNumber);
  run->add_option("--seeds", ro.seeds, "seed list (default: --seed)");
  run->add_option("--hyper", ro.hyper, "auto or manual")->check(CLI::IsMember({"auto", "manual"}));
  run->add_option("--eta", ro.eta, "learning rate (manual)");
  run->add_option("--lambda", ro.lambda, "optimism weight (manual)");
  run->add_option("--beta", ro.beta, "override the class beta");
  run->add_option("--kappa", ro.kappa, "kappa for --hyper auto");
  run->add_option("--dc", ro.dc, "decoupling coefficient for --hyper auto");
  run->add_flag("--diag", ro.diag, "write diag.csv and lemma_report.json");
  run->add_flag("--dump-posterior", ro.dump_posterior, "enumerate posteriors per episode");
  run->add_option("--workers", ro.workers, "worker threads (default: hardware)");

  DiagOptions dopt;
  auto* diag = app.add_subcommand("diag", "diagnostics battery");
  diag->add_option("--run-dir", dopt.run_dir, "directory of a recorded run");
  diag->add_option("--instance", dopt.instance, "instance for random probes");
  diag->add_option("--probes", dopt.probes, "number of random probes")->check(CLI::PositiveNumber);
  diag->add_option("--beta", dopt.beta, "probe bound beta (default H+1)");
  diag->add_flag("--inject-fault", dopt.inject_fault, "corrupt a residual table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(go, g);
    if (*solve) return cmd_solve(solve_instance, g);
    if (*kappa) return cmd_kappa(k_instance, k_class, k_eps, k_T, g);
    if (*run) return cmd_run(ro, g);
    if (*diag) return cmd_diag(dopt, g);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
