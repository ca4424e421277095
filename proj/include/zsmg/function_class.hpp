#pragma once

#include <optional>
#include <span>
#include <vector>

#include "zsmg/game.hpp"
#include "zsmg/matrix_game.hpp"

namespace zsmg {

// f = (f^1, ..., f^H) with entries in [0, beta - 1].
struct QFunction {
  std::vector<LayerTable> layers;
  double beta = 2.0;

  int horizon() const { return static_cast<int>(layers.size()); }
  // Throws ValidationError on out-of-range entries.
  void validate() const;
  bool operator==(const QFunction&) const = default;
};

// F = F_1 x ... x F_H with per-step candidate layers and priors p_0^h.
struct FunctionClass {
  Dims dims;
  double beta = 2.0;
  std::vector<std::vector<LayerTable>> layers;  // [h][k]
  std::vector<std::vector<double>> prior;       // [h][k]

  int size(int h) const { return static_cast<int>(layers[h].size()); }
  // prod_h |F_h| as a double (may exceed integer range for large classes).
  double joint_size() const;
  QFunction materialize(std::span<const int> indices) const;
  void set_uniform_prior();
  // Throws ValidationError unless priors are positive distributions and
  // every member respects the [0, beta - 1] bound.
  void validate() const;
};

using LayerSolutions = std::vector<MatrixGameSolution>;  // one per state

struct InducedPolicyBundle {
  MarkovPolicy mu;
  ValueTable v;                               // V_{f,h}(x), [h][x]
  std::vector<LayerSolutions> solutions;      // [h][x]
};

LayerSolutions solve_layer(const LayerTable& layer);

InducedPolicyBundle induce_policy(const QFunction& f);

// Matrix-game solutions of every class member, [h][k][x].
struct ClassSolutions {
  std::vector<std::vector<LayerSolutions>> members;
  static ClassSolutions build(const FunctionClass& fc);
};

// Same result as induce_policy(fc.materialize(indices)) without re-solving.
InducedPolicyBundle induce_policy(const FunctionClass& fc, const ClassSolutions& cache,
                                  std::span<const int> indices);

// V^mu_{f,h}(x) = min_b mu_h(x)^T f^h(x, ., b) with `layer` the step-h table.
double induced_min_value(const LayerTable& layer, const MarkovPolicy& mu, int h, int x);

struct ClosureOptions {
  bool include_seeds = true;
  int depth = 0;
  // Construction fails when any layer would exceed this many members.
  std::size_t size_cap = 4096;
  // Keep only the first n distinct members of each layer (0 keeps all). Q*
  // is inserted first, then best responses, closure iterates, and seeds.
  std::size_t truncate_per_layer = 0;
  double beta = 0.0;  // 0 selects H + 1
};

struct CompletenessDefect {
  double value = 0.0;  // max over (f, g, h) of min_{f'} ||T^{mu_f}_h g - f'||_inf
  int h = -1;
  int policy_member = -1;  // index in F_{h+1} inducing mu_f
  int g_member = -1;       // index in F_{h+1}
};

struct ClosureResult {
  FunctionClass fc;
  CompletenessDefect defect;
};

// Finite class containing Q*, Q^{mu_f, dagger} for each seed, and optionally
// iterated T^{mu_f}_h g backups. Throws ValidationError when the size cap is
// hit or a member violates the beta bound.
ClosureResult build_closure_class(const TabularMG& mg, const std::vector<QFunction>& seeds,
                                  const ClosureOptions& options = {});

CompletenessDefect completeness_defect(const TabularMG& mg, const FunctionClass& fc);

struct KappaResult {
  double kappa = 0.0;
  double kappa1 = 0.0;
  // Set when some F^{mu_f}_h(eps, g^{h+1}) is empty (kappa is +inf then).
  struct Offender {
    int h;
    int policy_member;  // in F_{h+1}; -1 at the last step
    int g_member;       // in F_{h+1}; -1 at the last step
  };
  std::optional<Offender> offender;
};

// kappa(eps) = sup_f sup_g sum_h ln 1/p_0^h(F^{mu_f}_h(eps, g^{h+1})) and the
// T_h-based kappa_1(eps), by exact enumeration over the finite class.
KappaResult compute_kappa(const TabularMG& mg, const FunctionClass& fc, double epsilon);

}  // namespace zsmg
