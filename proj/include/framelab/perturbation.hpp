#pragma once

// Closeness-condition certification and the perturbation theorems: each
// verifier checks the hypothesis with explicit margins, evaluates the
// predicted bounds, computes the actual bounds of the perturbed system and
// returns a verdict.

#include "framelab/operators.hpp"

#include <map>
#include <optional>

namespace framelab {

// (mu, lambda1, lambda2) of the closeness conditions; the same triple also
// carries the (nu, beta1, beta2) operator variant under role labels.
struct PerturbationConstants {
  double mu = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  PerturbationConstants() = default;
  PerturbationConstants(double mu_, double l1, double l2);
};

enum class TheoremId {
  bessel_3_1,
  frame_3_3,
  banach_frame_3_6,
  banach_frame_proj_3_7,
  riesz_3_8,
  atomic_3_9,
  atomic_3_10,
  operator_pert_cc,
  hilbert_1_1,
};

enum class Verdict { verified, hypothesis_fails, bound_violated };

std::string to_string(TheoremId id);
std::string to_string(Verdict v);

// One named inequality check. `boundary` marks margins inside [0, eps_hyp]:
// strict theorem hypotheses are not considered satisfied there.
struct MarginCheck {
  std::string name;
  double margin = 0.0;
  double tolerance = 0.0;
  bool satisfied = false;
  bool boundary = false;
};

struct TheoremReport {
  TheoremId theorem_id = TheoremId::frame_3_3;
  bool hypothesis_holds = false;
  std::vector<MarginCheck> margins;
  double delta = std::numeric_limits<double>::quiet_NaN();
  double predicted_lower = std::numeric_limits<double>::quiet_NaN();
  double predicted_upper = std::numeric_limits<double>::quiet_NaN();
  BoundsEstimate actual_lower;
  BoundsEstimate actual_upper;
  Verdict verdict = Verdict::hypothesis_fails;
  PerturbationConstants constants;
  double residual = std::numeric_limits<double>::quiet_NaN();
  // Auxiliary numeric outputs: premise bounds, operator norms, witness
  // reconstruction errors, oracle values when dims permit.
  std::map<std::string, double> extras;
};

struct VerifyOptions {
  enum class Oracle { automatic, on, off };
  Oracle oracle = Oracle::automatic;
  double tol_residual = 1e-8;
  double tol_bound_abs = 1e-6;
  double tol_bound_rel = 1e-6;
  double eps_hyp = 1e-9;
  std::optional<double> max_delta;  // optional Delta < eps restriction
  OptimOptions optim;

  bool use_oracle(int dim) const;
};

// Delta = (B(lambda1+lambda2) + mu) / (1 - lambda2); requires lambda2 < 1.
double delta(double B, const PerturbationConstants& k);

// Objective terms of the (P*) residual over the unit sphere of X_d*:
// ||sum d_i (phi_i - g_i)|| - mu||d|| - lambda1||sum d_i g_i||
//                           - lambda2||sum d_i phi_i||.
std::vector<NormTerm> pstar_residual_terms(const FrameSystem& G,
                                           const FrameSystem& Phi,
                                           const PerturbationConstants& k);
// (P) flavor: rows are vectors of X and the sup runs over the unit sphere
// of X_d.
std::vector<NormTerm> p_residual_terms(const FrameSystem& F,
                                       const FrameSystem& Psi,
                                       const PerturbationConstants& k);

// sup of the (P*) residual; condition (P*) holds iff the result is <= 0.
// When the oracle policy applies (dim <= 4) the grid value refines the
// optimizer estimate.
double worst_case_residual(const FrameSystem& G, const FrameSystem& Phi,
                           const PerturbationConstants& k,
                           const VerifyOptions& opts = {});

// Smallest mu >= 0 such that (P*) holds with the given lambdas.
double minimal_mu(const FrameSystem& G, const FrameSystem& Phi, double lambda1,
                  double lambda2, const VerifyOptions& opts = {});
// Same in the (P) direction (used by the vector-side conditions).
double minimal_mu_p(const FrameSystem& F, const FrameSystem& Psi,
                    double lambda1, double lambda2,
                    const VerifyOptions& opts = {});

// Prop 3.1 / Cor 3.2: perturbed Bessel bound B + Delta and difference
// bound Delta.
TheoremReport verify_bessel_perturbation(const FrameSystem& G,
                                         const FrameSystem& Phi,
                                         const PerturbationConstants& k,
                                         const VerifyOptions& opts = {});

// Prop 3.3 / Cor 3.4: frame bounds [A - Delta, B + Delta] under
// mu + lambda2(A+B) + lambda1·B < A.
TheoremReport verify_frame_perturbation(const FrameSystem& G,
                                        const FrameSystem& Phi,
                                        const PerturbationConstants& k,
                                        const VerifyOptions& opts = {});

// Thm 3.6: Banach frame perturbation with reconstruction witness
// S~ = ((T~ S*)^{-1})* S.
TheoremReport verify_banach_frame_perturbation(const FrameSystem& G,
                                               const FrameSystem& Phi,
                                               const Mat& S,
                                               const PerturbationConstants& k,
                                               const VerifyOptions& opts = {});

// Cor 3.7: same through a bounded projection P onto the analysis range,
// S := U^{-1} P.
TheoremReport verify_banach_frame_projection(const FrameSystem& G,
                                             const FrameSystem& Phi,
                                             const Mat& P,
                                             const PerturbationConstants& k,
                                             const VerifyOptions& opts = {});

// Prop 3.8: Riesz basis perturbation with the sharper lower bound
// A - (A(lambda1+lambda2) + mu)/(1 + lambda2).
TheoremReport verify_riesz_perturbation(const FrameSystem& F,
                                        const FrameSystem& Psi,
                                        const PerturbationConstants& k,
                                        const VerifyOptions& opts = {});

enum class AtomicMode { full_A9, truncated_A10 };

// Prop 3.9 / Thm 3.10: perturbed atomic decomposition; constructs
// theta_i = g_i o G^{-1} and verifies the reconstruction identity and the
// frame bounds of the dual family.
TheoremReport verify_atomic_decomposition_perturbation(
    const FrameSystem& G, const FrameSystem& F, const FrameSystem& Psi,
    const PerturbationConstants& k, AtomicMode mode = AtomicMode::full_A9,
    const VerifyOptions& opts = {});

// Casazza-Christensen operator perturbation: the reconstruction operator S
// moves instead of the family; constructs theta_i = g_i o K^{-1} with
// K = S~ U.
TheoremReport verify_operator_perturbation_cc(const FrameSystem& G,
                                              const Mat& S, const Mat& S_tilde,
                                              const PerturbationConstants& k,
                                              const VerifyOptions& opts = {});

// Hilbert-space verifier (p = q = 2): Theorem 1.1 with squared-norm frame
// bounds.
TheoremReport verify_hilbert_frame_perturbation(const FrameSystem& G,
                                                const FrameSystem& Phi,
                                                const PerturbationConstants& k,
                                                const VerifyOptions& opts = {});

// Theorem 1.1 Eq. (2) bounds for squared-convention (A, B); throws on
// hypothesis failure.
std::pair<double, double> hilbert_bounds_1_1(double A, double B,
                                             const PerturbationConstants& k);

// Thm 3.6 predicted lower bound (1 - (mu||S|| + lambda1)) / ((1+lambda2)||S||).
double banach_frame_lower_bound(double S_norm, const PerturbationConstants& k);

// Left inverse of the analysis matrix with minimal spectral norm.
Mat pseudo_inverse(const Mat& G);

}  // namespace framelab
