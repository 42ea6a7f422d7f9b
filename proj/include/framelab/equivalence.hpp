#pragma once

// Equivalences among closeness conditions: constant translations between the
// condition labels, implication checks with explicit constant witnesses, and
// the mu < A threshold for frames.

#include "framelab/perturbation.hpp"

namespace framelab {

enum class ConditionId {
  A1,    // (P) with lambda2 < 1 (Bessel premise)
  A11,   // single-constant synthesis form
  A12,   // single-constant coefficient form
  A13,   // three-constant coefficient form, lambda2 < 1
  A3,    // (P) with mu + lambda2(A+B) + lambda1 B < A (frame premise)
  A3a,   // A11 with mu < A
  A3b,   // A12 with mu < A
  A3c,   // coefficient form with lambda2 > 0 and the frame cap
  A6,    // (P*) with max(lambda2, lambda1 + mu||S||) < 1 (Banach frame)
  A6tilde,
  A8,    // (P) with max(lambda2, lambda1 + mu/A) < 1 (Riesz basis)
  A8tilde,
  A9,    // restricted (P) with max(lambda2, lambda1 + mu B) < 1 (atomic)
  A9tilde,
};

std::string to_string(ConditionId id);
ConditionId parse_condition_id(const std::string& s);

// Exact constant translations of the supported implication pairs:
//   A1 -> A11, A13 -> A12 : mu~ = Delta(B, k)
//   A6 -> A6~, A8 -> A8~  : mu~ = mu + lambda1·B, lambda2~ = lambda2
//   A9 -> A9~             : lambda1~ = lambda1 + mu·B, lambda2~ = lambda2
PerturbationConstants translate_constants(ConditionId from, ConditionId to,
                                          const PerturbationConstants& k,
                                          double B);

// Systems the conditions quantify over. `base`/`pert` rows are vectors of X
// for the (P)-side conditions and functionals in X* for the (P*)-side ones;
// `coefficients` carries {g_i} for the restricted A9 conditions and
// `reconstruction` carries S for the A6 side condition.
struct EquivalenceInstance {
  FrameSystem base;
  FrameSystem pert;
  std::optional<Mat> reconstruction;      // S, n x m
  std::optional<FrameSystem> coefficients;  // {g_i} for A9/A9~
};

struct EquivalenceReport {
  ConditionId cond_a = ConditionId::A1;
  ConditionId cond_b = ConditionId::A11;
  PerturbationConstants k_a;
  PerturbationConstants k_b;
  double residual_a = 0.0;
  double residual_b = 0.0;
  double bound_B = 0.0;  // the bound used by the translation
  std::vector<MarginCheck> side_conditions;
  bool cond_a_certified = false;
  bool cond_b_certified = false;
  bool ok = false;
  std::map<std::string, double> extras;
};

// sup of the residual of `cond` with constants `k` on the instance;
// the condition holds iff the result is <= 0.
double condition_residual(const EquivalenceInstance& inst, ConditionId cond,
                          const PerturbationConstants& k,
                          const VerifyOptions& opts = {});

// Certifies cond_a with k_a, translates the constants, certifies cond_b.
EquivalenceReport check_equivalence(const EquivalenceInstance& inst,
                                    ConditionId cond_a,
                                    const PerturbationConstants& k_a,
                                    ConditionId cond_b,
                                    const VerifyOptions& opts = {});

struct MuThresholdReport {
  double A = 0.0;
  double B = 0.0;
  double mu_star = 0.0;
  bool applicable = false;  // mu_star < A with strict margin
  MarginCheck threshold;
  BoundsEstimate psi_lower;
  double psi_lower_cmp = 0.0;
  bool lower_bound_verified = false;
  std::map<std::string, double> extras;
};

// Prop 4.2 threshold: minimal single-constant mu~* for (F, Psi); when
// mu~* < A the perturbed family keeps a frame lower bound >= A - mu~*.
MuThresholdReport check_frame_mu_threshold(const FrameSystem& F,
                                           const FrameSystem& Psi,
                                           const VerifyOptions& opts = {});

}  // namespace framelab
