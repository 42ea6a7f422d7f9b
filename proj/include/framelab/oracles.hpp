#pragma once

// Independent brute-force references for dims <= 4: deterministic angular
// grids of the unit sphere (p-norm renormalized) plus the l1/linf extreme
// points. Grid maxima under-estimate suprema; the reported gap is a
// Lipschitz-style error bound.

#include "framelab/operators.hpp"

namespace framelab {

struct BruteResult {
  double value = 0.0;
  double gap = 0.0;  // |true extremum - value| <= gap
  long evaluations = 0;
};

// Grid maximum of sum_j coeff_j ||M_j v|| over the unit sphere of `in`.
BruteResult brute_combination_sup(const std::vector<NormTerm>& terms,
                                  const SpaceSpec& in, int resolution);

BruteResult brute_op_norm(const Mat& M, const SpaceSpec& from,
                          const SpaceSpec& to, int resolution);

BruteResult brute_lower_bound(const Mat& M, const SpaceSpec& from,
                              const SpaceSpec& to, int resolution);

struct PerturbationConstants;  // perturbation.hpp

// Grid maximum of the (P*) residual over the unit sphere of X_d*; the
// condition holds iff the true supremum is <= 0.
BruteResult brute_residual(const FrameSystem& G, const FrameSystem& Phi,
                           const PerturbationConstants& k, int resolution);

// Default points-per-angle by sphere dimension (dim 4 grids grow cubically).
int default_oracle_resolution(int dim);

}  // namespace framelab
