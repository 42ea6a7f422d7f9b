#include "framelab/oracles.hpp"

#include "framelab/perturbation.hpp"

#include <cmath>
#include <numbers>

namespace framelab {

namespace {

// Walks the spherical-coordinate grid of S^{dim-1}: angles[0..dim-3] in
// [0, pi] with resolution/2 + 1 samples, the last angle in [0, 2pi) with
// `resolution` samples. Doubling the resolution refines the grid in place,
// so grid extrema are monotone in the resolution.
template <typename F>
void for_each_direction(int dim, int resolution, F&& visit) {
  if (dim == 1) {
    Vec v(1);
    v[0] = 1.0;
    visit(v);
    v[0] = -1.0;
    visit(v);
    return;
  }
  const int half = std::max(1, resolution / 2);
  const int n_polar = dim - 2;
  std::vector<int> idx(static_cast<std::size_t>(n_polar) + 1, 0);
  Vec v(dim);
  for (;;) {
    double sin_prod = 1.0;
    for (int a = 0; a < n_polar; ++a) {
      const double th = std::numbers::pi * idx[a] / half;
      v[a] = sin_prod * std::cos(th);
      sin_prod *= std::sin(th);
    }
    const double phi = 2.0 * std::numbers::pi * idx[n_polar] / resolution;
    v[dim - 2] = sin_prod * std::cos(phi);
    v[dim - 1] = sin_prod * std::sin(phi);
    visit(v);

    int a = n_polar;
    for (;;) {
      ++idx[a];
      const int limit = (a == n_polar) ? resolution : half + 1;
      if (idx[a] < limit) break;
      idx[a] = 0;
      if (a == 0) return;
      --a;
    }
  }
}

double combination_value(const std::vector<NormTerm>& terms, const Vec& v) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coeff * norm(Vec(t.M * v), t.out_p);
  return s;
}

// Lipschitz constant of the objective w.r.t. the in-norm.
double combination_lipschitz(const std::vector<NormTerm>& terms,
                             const SpaceSpec& in) {
  double L = 0.0;
  for (const auto& t : terms) {
    L += std::abs(t.coeff) *
         op_norm_cheap_upper(t.M, in, SpaceSpec(static_cast<int>(t.M.rows()),
                                                t.out_p));
  }
  return L;
}

// Covering-radius estimate of the renormalized grid in the p-norm. The
// parameter map theta -> w(theta)/||w(theta)||_p has directional Lipschitz
// constant at most 2·distortion, distortion = max(1, d^(1/p - 1/2)) /
// min(1, d^(1/p - 1/2)); each angle is within pi/resolution of a grid value
// and a factor 2 covers the multi-angle cell diagonal.
double covering_radius(const SpaceSpec& in, int resolution) {
  const int d = in.dim;
  if (d == 1) return 0.0;
  const double inv_p = in.p.is_infinity() ? 0.0 : 1.0 / in.p.value();
  const double r = std::pow(static_cast<double>(d), inv_p - 0.5);
  const double distortion = std::max(1.0, r) / std::min(1.0, r);
  const double h = std::numbers::pi / std::max(1, resolution / 2);
  return 2.0 * distortion * (d - 1) * h;
}

}  // namespace

int default_oracle_resolution(int dim) {
  switch (dim) {
    case 1:
    case 2:
      return 720;
    case 3:
      return 360;
    default:
      return 48;
  }
}

BruteResult brute_combination_sup(const std::vector<NormTerm>& terms,
                                  const SpaceSpec& in, int resolution) {
  if (in.dim > 4) {
    throw input_error("brute-force oracle supports dim <= 4, got " +
                      std::to_string(in.dim));
  }
  if (resolution < 2) throw input_error("oracle resolution must be >= 2");
  for (const auto& t : terms) require_finite(t.M, "oracle matrix");

  BruteResult r;
  bool first = true;
  const auto consider = [&](const Vec& dir) {
    const double n = norm(dir, in.p);
    if (n < 1e-300) return;
    const double f = combination_value(terms, Vec(dir / n));
    ++r.evaluations;
    if (first || f > r.value) {
      r.value = f;
      first = false;
    }
  };

  for_each_direction(in.dim, resolution, consider);
  // l1 extreme points; the sign vectors double as linf extreme points and
  // orthant representatives.
  for (int i = 0; i < in.dim; ++i) {
    Vec e = Vec::Zero(in.dim);
    e[i] = 1.0;
    consider(e);
    e[i] = -1.0;
    consider(e);
  }
  for (unsigned mask = 0; mask < (1u << in.dim); ++mask) {
    Vec s(in.dim);
    for (int i = 0; i < in.dim; ++i) s[i] = (mask >> i) & 1u ? -1.0 : 1.0;
    consider(s);
  }

  r.gap = combination_lipschitz(terms, in) * covering_radius(in, resolution);
  return r;
}

BruteResult brute_op_norm(const Mat& M, const SpaceSpec& from,
                          const SpaceSpec& to, int resolution) {
  if (M.rows() != to.dim || M.cols() != from.dim)
    throw input_error("oracle matrix shape mismatch");
  return brute_combination_sup({{1.0, M, to.p}}, from, resolution);
}

BruteResult brute_lower_bound(const Mat& M, const SpaceSpec& from,
                              const SpaceSpec& to, int resolution) {
  if (M.rows() != to.dim || M.cols() != from.dim)
    throw input_error("oracle matrix shape mismatch");
  BruteResult r = brute_combination_sup({{-1.0, M, to.p}}, from, resolution);
  r.value = -r.value;
  return r;
}

BruteResult brute_residual(const FrameSystem& G, const FrameSystem& Phi,
                           const PerturbationConstants& k, int resolution) {
  return brute_combination_sup(pstar_residual_terms(G, Phi, k),
                               G.synthesis_dual_in(), resolution);
}

}  // namespace framelab
