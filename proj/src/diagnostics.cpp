#include "zsmg/diagnostics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace zsmg {

namespace {

LayerTable subtract(const LayerTable& lhs, const LayerTable& rhs) {
  LayerTable out = lhs;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= rhs.data()[i];
  return out;
}

void fill_expectations(ResidualReport& report, const OccupancyMeasure* occupancy) {
  if (!occupancy) return;
  report.expected.clear();
  for (std::size_t h = 0; h < report.residual.size(); ++h)
    report.expected.push_back(occupancy->expect(static_cast<int>(h), report.residual[h]));
}

const LayerTable& successor(const QFunction& f, int h) {
  // The last-step backups ignore their argument.
  return h + 1 < f.horizon() ? f.layers[h + 1] : f.layers[h];
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

ExcessLossMoments moments(const TabularMG& mg, double beta, double f_value, double residual,
                          const std::vector<double>& next_values, int h, int x, int a, int b) {
  const double c = f_value - mg.reward(h, x, a, b);
  const auto p = mg.next_state_dist(h, x, a, b);
  auto z_of = [&](int y) { return c - (next_values.empty() ? 0.0 : next_values[y]); };
  double ez = 0.0;
  for (int y = 0; y < mg.num_states(); ++y) ez += p[y] * z_of(y);
  ExcessLossMoments m;
  for (int y = 0; y < mg.num_states(); ++y) {
    const double z = z_of(y);
    const double dl = z * z - (z - ez) * (z - ez);
    m.mean += p[y] * dl;
    m.second_moment += p[y] * dl * dl;
  }
  m.residual_sq = residual * residual;
  m.ok = std::abs(m.mean - m.residual_sq) <= 1e-10 &&
         m.second_moment <= 4.0 * beta * beta / 3.0 * m.residual_sq + 1e-10;
  return m;
}

}  // namespace

ResidualReport residuals(const TabularMG& mg, const QFunction& f,
                         const OccupancyMeasure* occupancy) {
  ResidualReport report;
  for (int h = 0; h < mg.horizon(); ++h)
    report.residual.push_back(subtract(f.layers[h], bellman_apply(mg, successor(f, h), h)));
  fill_expectations(report, occupancy);
  return report;
}

ResidualReport residuals_mu(const TabularMG& mg, const QFunction& g, const MarkovPolicy& mu,
                            const OccupancyMeasure* occupancy) {
  ResidualReport report;
  for (int h = 0; h < mg.horizon(); ++h)
    report.residual.push_back(
        subtract(g.layers[h], bellman_apply_mu(mg, successor(g, h), mu, h)));
  fill_expectations(report, occupancy);
  return report;
}

LemmaCheck check_lemma_main(const TabularMG& mg, const QFunction& f, const MarkovPolicy& nu,
                            const NashSolution& nash) {
  const int x1 = mg.initial_state();
  const InducedPolicyBundle bundle = induce_policy(f);
  const OccupancyMeasure occ = compute_occupancy(mg, bundle.mu, nu);
  const ResidualReport res = residuals(mg, f, &occ);
  const double v_exec = policy_value(mg, bundle.mu, nu)[0][x1];
  LemmaCheck out;
  out.lhs = nash.value() - v_exec;
  out.rhs = sum(res.expected) + nash.value() - bundle.v[0][x1];
  out.slack = out.rhs - out.lhs;
  out.ok = out.slack >= -kLemmaTolerance;
  return out;
}

LemmaCheck check_lemma_booster(const TabularMG& mg, const QFunction& f, const QFunction& g) {
  const MarkovPolicy mu = induce_policy(f).mu;
  const MarkovPolicy nu = booster_response(g, mu);
  return check_lemma_booster(mg, mu, nu, g, residuals_mu(mg, g, mu));
}

LemmaCheck check_lemma_booster(const TabularMG& mg, const MarkovPolicy& mu,
                               const MarkovPolicy& nu, const QFunction& g,
                               const ResidualReport& residual_mu) {
  const int x1 = mg.initial_state();
  const OccupancyMeasure occ = compute_occupancy(mg, mu, nu);
  double expected = 0.0;
  for (int h = 0; h < mg.horizon(); ++h) expected += occ.expect(h, residual_mu.residual[h]);
  const double v_exec = policy_value(mg, mu, nu)[0][x1];
  const double v_br = best_response(mg, mu).value();
  LemmaCheck out;
  out.lhs = v_exec - v_br;
  out.rhs = -expected + induced_min_value(g.layers[0], mu, 0, x1) - v_br;
  out.slack = std::abs(out.lhs - out.rhs);
  out.ok = out.slack <= kLemmaTolerance;
  return out;
}

ExcessLossMoments excess_loss_moments(const TabularMG& mg, const QFunction& f, int h, int x,
                                      int a, int b) {
  const std::vector<double> next =
      h + 1 < mg.horizon() ? nash_values(f.layers[h + 1]) : std::vector<double>{};
  const double residual = f.layers[h](x, a, b) - bellman_apply(mg, successor(f, h), h)(x, a, b);
  return moments(mg, f.beta, f.layers[h](x, a, b), residual, next, h, x, a, b);
}

ExcessLossMoments excess_loss_moments(const TabularMG& mg, const QFunction& g,
                                      const MarkovPolicy& mu, int h, int x, int a, int b) {
  const std::vector<double> next =
      h + 1 < mg.horizon() ? min_values(g.layers[h + 1], mu, h + 1) : std::vector<double>{};
  const double residual =
      g.layers[h](x, a, b) - bellman_apply_mu(mg, successor(g, h), mu, h)(x, a, b);
  return moments(mg, g.beta, g.layers[h](x, a, b), residual, next, h, x, a, b);
}

DcTrace dc_trace(const TabularMG& mg, const FunctionClass& fc,
                 const std::vector<EpisodeArtifacts>& episodes) {
  const int T = static_cast<int>(episodes.size());
  const int H = mg.horizon();
  const ClassSolutions cache = ClassSolutions::build(fc);

  std::vector<OccupancyMeasure> occ;
  std::vector<MarkovPolicy> mus;
  occ.reserve(T);
  mus.reserve(T);
  for (const auto& ep : episodes) {
    if (static_cast<int>(ep.f_indices.size()) != H || static_cast<int>(ep.g_indices.size()) != H)
      throw std::invalid_argument("episode artifacts lack per-step indices");
    MarkovPolicy mu = induce_policy(fc, cache, ep.f_indices).mu;
    const MarkovPolicy nu = booster_response(fc.materialize(ep.g_indices), mu);
    occ.push_back(compute_occupancy(mg, mu, nu));
    mus.push_back(std::move(mu));
  }

  DcTrace trace;
  trace.T = T;
  trace.H = H;
  trace.lhs_term.assign(static_cast<std::size_t>(T) * H, 0.0);
  trace.rhs_inner.assign(static_cast<std::size_t>(T) * H, 0.0);
  std::map<std::pair<std::vector<int>, std::vector<int>>, ResidualReport> memo;
  for (int t = 0; t < T; ++t) {
    const auto key = std::make_pair(episodes[t].f_indices, episodes[t].g_indices);
    auto it = memo.find(key);
    if (it == memo.end())
      it = memo.emplace(key, residuals_mu(mg, fc.materialize(episodes[t].g_indices), mus[t]))
               .first;
    const ResidualReport& res = it->second;
    for (int h = 0; h < H; ++h) {
      const std::size_t idx = static_cast<std::size_t>(t) * H + h;
      trace.lhs_term[idx] = occ[t].expect(h, res.residual[h]);
      double inner = 0.0;
      for (int s = 0; s < t; ++s) {
        const double e = occ[s].expect(h, res.residual[h]);
        inner += e * e;
      }
      trace.rhs_inner[idx] = inner;
      trace.lhs_total += trace.lhs_term[idx];
      trace.rhs_total += inner;
    }
  }
  return trace;
}

std::vector<DcCheck> check_dc(const DcTrace& trace, const std::vector<double>& mu_grid, double K) {
  std::vector<DcCheck> out;
  for (double mu : mu_grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("dc parameter mu must be positive");
    DcCheck c;
    c.mu = mu;
    c.lhs = trace.lhs_total;
    c.bound = mu * trace.rhs_total + K / (4.0 * mu);
    c.ok = c.lhs <= c.bound;
    out.push_back(c);
  }
  return out;
}

void write_dc_csv(std::ostream& os, const DcTrace& trace) {
  os << "t,h,lhs_term,rhs_inner\n";
  for (int t = 0; t < trace.T; ++t)
    for (int h = 0; h < trace.H; ++h) {
      const std::size_t idx = static_cast<std::size_t>(t) * trace.H + h;
      os << t + 1 << ',' << h + 1 << ',' << format_double(trace.lhs_term[idx]) << ','
         << format_double(trace.rhs_inner[idx]) << '\n';
    }
}

double dc_bound_linear(int d, int H, int T) {
  if (d <= 0 || H <= 0 || T <= 0) throw std::invalid_argument("dc_bound_linear needs positive d, H, T");
  return 2.0 * d * H * (2.0 + std::log(2.0 * H * T));
}

EllipticalCheck elliptical_potential_check(const std::vector<std::vector<double>>& vectors,
                                           const std::vector<std::vector<double>>& lambda0) {
  const int d = static_cast<int>(lambda0.size());
  if (d == 0) throw std::invalid_argument("Lambda0 must be non-empty");
  Eigen::MatrixXd L(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(lambda0[i].size()) != d)
      throw std::invalid_argument("Lambda0 must be square");
    for (int j = 0; j < d; ++j) L(i, j) = lambda0[i][j];
  }
  if (!L.isApprox(L.transpose(), 1e-12)) throw std::invalid_argument("Lambda0 must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(L, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1.0 - 1e-12)
    throw std::invalid_argument("Lambda0 must have smallest eigenvalue at least 1");

  const double log_det0 = 2.0 * Eigen::LLT<Eigen::MatrixXd>(L).matrixL().toDenseMatrix()
                                    .diagonal().array().log().sum();
  EllipticalCheck out;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != d) throw std::invalid_argument("vector dimension mismatch");
    const Eigen::Map<const Eigen::VectorXd> phi(v.data(), d);
    if (phi.norm() > 1.0 + 1e-12) throw std::invalid_argument("feature norm exceeds 1");
    out.quad_sum += phi.dot(Eigen::LLT<Eigen::MatrixXd>(L).solve(phi));
    L += phi * phi.transpose();
  }
  const Eigen::LLT<Eigen::MatrixXd> final_llt(L);
  out.log_det_ratio =
      2.0 * final_llt.matrixL().toDenseMatrix().diagonal().array().log().sum() - log_det0;
  out.upper = 2.0 * out.log_det_ratio;
  out.ok = out.log_det_ratio <= out.quad_sum + 1e-10 && out.quad_sum <= out.upper + 1e-10;
  return out;
}

}  // namespace zsmg
