#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "zsmg/function_class.hpp"
#include "zsmg/game.hpp"
#include "zsmg/oracle.hpp"
#include "zsmg/selfplay.hpp"

namespace zsmg {

// Bellman residual tables and, when an occupancy is supplied, their
// per-step expectations.
struct ResidualReport {
  std::vector<LayerTable> residual;  // [h](x, a, b)
  std::vector<double> expected;      // [h], empty without an occupancy
};

// E_h(f) = f^h - T_h f^{h+1}.
ResidualReport residuals(const TabularMG& mg, const QFunction& f,
                         const OccupancyMeasure* occupancy = nullptr);
// E^mu_h(g) = g^h - T^mu_h g^{h+1}.
ResidualReport residuals_mu(const TabularMG& mg, const QFunction& g, const MarkovPolicy& mu,
                            const OccupancyMeasure* occupancy = nullptr);

struct LemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs for the inequality, |lhs - rhs| for the equality
  bool ok = false;
};

inline constexpr double kLemmaTolerance = 1e-8;

// V* - V^{mu_f,nu} <= sum_h E[E_h(f)] + V* - V_{f,1}(x^1).
LemmaCheck check_lemma_main(const TabularMG& mg, const QFunction& f, const MarkovPolicy& nu,
                            const NashSolution& nash);

// V^{mu,nu} - V^{mu,dagger} = -sum_h E[E^mu_h(g)] + V^mu_{g,1}(x^1) - V^{mu,dagger}_1(x^1)
// with mu = mu_f and nu = nu_{f,g}.
LemmaCheck check_lemma_booster(const TabularMG& mg, const QFunction& f, const QFunction& g);

// Same identity evaluated from a caller-supplied residual table, so that a
// corrupted table can be shown to break it.
LemmaCheck check_lemma_booster(const TabularMG& mg, const MarkovPolicy& mu,
                               const MarkovPolicy& nu, const QFunction& g,
                               const ResidualReport& residual_mu);

struct ExcessLossMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double residual_sq = 0.0;
  bool ok = false;
};

// Exact moments over x' ~ P_h(.|x,a,b) of Z^2 - (Z - EZ)^2 with
// Z = f^h(x,a,b) - r^h(x,a,b) - V_{f,h+1}(x').
ExcessLossMoments excess_loss_moments(const TabularMG& mg, const QFunction& f, int h, int x,
                                      int a, int b);
// Booster variant with V^mu_{g,h+1}(x') in place of V_{f,h+1}(x').
ExcessLossMoments excess_loss_moments(const TabularMG& mg, const QFunction& g,
                                      const MarkovPolicy& mu, int h, int x, int a, int b);

// Both sides of the decoupling inequality on a realized run.
struct DcTrace {
  int T = 0;
  int H = 0;
  std::vector<double> lhs_term;   // [t * H + h] = E_{pi_t}[E^{mu_{f_t}}_h(g_t)]
  std::vector<double> rhs_inner;  // [t * H + h] = sum_{s<t} E_{pi_s}[E^{mu_{f_t}}_h(g_t)]^2
  double lhs_total = 0.0;
  double rhs_total = 0.0;
};

// Exact occupancies of pi_s = (mu_{f_s}, nu_{f_s,g_s}) for every episode.
DcTrace dc_trace(const TabularMG& mg, const FunctionClass& fc,
                 const std::vector<EpisodeArtifacts>& episodes);

inline constexpr std::array<double, 4> kDcMuGrid = {0.1, 0.25, 0.5, 1.0};

struct DcCheck {
  double mu = 0.0;
  double lhs = 0.0;
  double bound = 0.0;  // mu * rhs + K / (4 mu)
  bool ok = false;
};

std::vector<DcCheck> check_dc(const DcTrace& trace, const std::vector<double>& mu_grid, double K);

// "t,h,lhs_term,rhs_inner" with 1-based t and h.
void write_dc_csv(std::ostream& os, const DcTrace& trace);

// 2 d H (2 + ln(2 H T)).
double dc_bound_linear(int d, int H, int T);

struct EllipticalCheck {
  double log_det_ratio = 0.0;
  double quad_sum = 0.0;
  double upper = 0.0;  // 2 log_det_ratio
  bool ok = false;
};

// log det(L_t)/det(L_0) <= sum_j phi_j^T L_{j-1}^{-1} phi_j <= 2 log det(L_t)/det(L_0)
// with L_j = L_0 + sum_{i<=j} phi_i phi_i^T. Throws std::invalid_argument when
// some ||phi|| > 1 or L_0 has an eigenvalue below 1.
EllipticalCheck elliptical_potential_check(const std::vector<std::vector<double>>& vectors,
                                           const std::vector<std::vector<double>>& lambda0);

}  // namespace zsmg
