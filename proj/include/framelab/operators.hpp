#pragma once

// Analysis/synthesis operators of a functional family, p->q operator norms
// (upper and lower bound functionals with certified brackets), frame /
// Bessel / Riesz bound computation, and the Neumann-type invertibility
// certificate.

#include "framelab/spaces.hpp"

#include <optional>
#include <utility>

namespace framelab {

// A functional family {g_i} in X*: row i of `matrix` represents g_i, so the
// analysis operator is f -> matrix·f : X -> X_d. The synthesis operator is
// the transpose acting on the dual-exponent space.
struct FrameSystem {
  Mat matrix;        // m x n
  SpaceSpec space_X;   // dim n, exponent p
  SpaceSpec space_Xd;  // dim m, exponent q

  FrameSystem(Mat matrix_, SpaceSpec X, SpaceSpec Xd);

  int n() const { return space_X.dim; }
  int m() const { return space_Xd.dim; }

  // c -> sum_i c_i g_i as an n x m matrix.
  Mat synthesis_matrix() const { return matrix.transpose(); }
  // (P*)-side synthesis: X_d* -> X* (dual exponents on both sides).
  SpaceSpec synthesis_dual_in() const { return dual_space(space_Xd); }
  SpaceSpec synthesis_dual_out() const { return dual_space(space_X); }
  // (P)-side synthesis, rows read as vectors in X: X_d -> X.
  SpaceSpec synthesis_in() const { return space_Xd; }
  SpaceSpec synthesis_out() const { return space_X; }
};

enum class BoundKind { upper_B, lower_A };

struct BoundsEstimate {
  double value = 0.0;
  BoundKind kind = BoundKind::upper_B;
  double certified_low = 0.0;
  double certified_high = 0.0;
  long evaluations = 0;
  std::string method;

  // Closed-form results collapse the bracket to a point.
  bool exact() const { return certified_low == certified_high; }
};

// Prop-2.6-style certificate: ||Gx - x|| <= lambda1·||x|| + lambda2·||Gx||
// with both constants < 1 brackets ||G^{-1}x|| / ||x||.
struct InvertibilityCertificate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double inverse_lower = 1.0;  // (1 - lambda2) / (1 + lambda1)
  double inverse_upper = 1.0;  // (1 + lambda2) / (1 - lambda1)
};

struct OptimOptions {
  int restarts = 32;
  int max_iterations = 500;
  double objective_tol = 1e-10;
  std::uint64_t seed = 0x5eedf00d;
};

// One term coeff·||M v||_p of a norm combination objective.
struct NormTerm {
  double coeff = 1.0;
  Mat M;
  Exponent out_p;
};

struct SupResult {
  double value = 0.0;
  Vec arg;
  long evaluations = 0;
};

// sup over the unit sphere of `in` of sum_j coeff_j·||M_j v||. Multi-start
// projected (sub)gradient ascent with deterministic restarts; for in.p = inf
// and dim <= 8 the cube vertices are enumerated as extra candidates.
SupResult maximize_norm_combination(const std::vector<NormTerm>& terms,
                                    const SpaceSpec& in,
                                    const OptimOptions& opts = {});

// sup over the unit sphere of ||M v||_to. Closed forms where they exist
// (p = 1, q = inf, p = q = 2, and small-dimension vertex/sign enumeration
// for p = inf / q = 1), otherwise the multi-start optimizer. `value` is the
// best iterate found (a certified under-estimate); certified_high is a cheap
// analytic over-bound.
BoundsEstimate op_norm(const Mat& M, const SpaceSpec& from, const SpaceSpec& to,
                       const OptimOptions& opts = {});

// inf over the unit sphere of ||M v||_to. An exact rank test decides
// "value = 0" algebraically before any optimization.
BoundsEstimate lower_bound(const Mat& M, const SpaceSpec& from,
                           const SpaceSpec& to, const OptimOptions& opts = {});

// Cheap certified over-bound of the p->q norm (equals the closed form when
// one applies; otherwise the best of the norm-nesting relaxations).
double op_norm_cheap_upper(const Mat& M, const SpaceSpec& from,
                           const SpaceSpec& to);
// Cheap certified under-bound of the lower functional (0 when rank-deficient).
double lower_bound_cheap_under(const Mat& M, const SpaceSpec& from,
                               const SpaceSpec& to);

// Upper bound of the analysis map X -> X_d.
BoundsEstimate bessel_bound(const FrameSystem& F, const OptimOptions& opts = {});

// (lower, upper) of the analysis map; lower.value = 0 means "not a frame".
std::pair<BoundsEstimate, BoundsEstimate> frame_bounds(
    const FrameSystem& F, const OptimOptions& opts = {});

// (lower, upper) of the synthesis map X_d -> Y, rows read as vectors of Y.
// Non-completeness (synthesis not onto) is flagged in the method string and
// forces lower.value = 0.
std::pair<BoundsEstimate, BoundsEstimate> riesz_bounds(
    const FrameSystem& F, const OptimOptions& opts = {});

// Searches for (lambda1, lambda2), both < 1, with
// ||Gx - x|| <= lambda1·||x|| + lambda2·||Gx|| for all x. Candidates are the
// pair (||G - I||, 0) and a coarse lambda2 grid; only certified upper bounds
// of the lambda1-sup are used, so a returned bracket is always valid.
std::optional<InvertibilityCertificate> check_neumann_invertibility(
    const Mat& G, const SpaceSpec& s, const OptimOptions& opts = {});

// Rank with pivoted elimination, tolerance 1e-12 relative to the largest
// pivot.
int numerical_rank(const Mat& M);

}  // namespace framelab
