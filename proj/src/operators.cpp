#include "framelab/operators.hpp"

#include <algorithm>
#include <cmath>

namespace framelab {

namespace {

double inv_exp(const Exponent& p) { return p.is_infinity() ? 0.0 : 1.0 / p.value(); }

double dim_pow(int d, double e) { return std::pow(static_cast<double>(d), e); }

double sigma_max(const Mat& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

double sigma_min(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// All sign vectors of dimension d with the last coordinate fixed to +1
// (norm objectives are symmetric under v -> -v).
std::vector<Vec> half_sign_vectors(int d) {
  std::vector<Vec> out;
  out.reserve(1u << (d - 1));
  for (unsigned mask = 0; mask < (1u << (d - 1)); ++mask) {
    Vec v(d);
    for (int i = 0; i < d - 1; ++i) v[i] = (mask >> i) & 1u ? -1.0 : 1.0;
    v[d - 1] = 1.0;
    out.push_back(v);
  }
  return out;
}

struct Objective {
  const std::vector<NormTerm>* terms;
  mutable long evaluations = 0;

  double eval(const Vec& v) const {
    ++evaluations;
    double s = 0.0;
    for (const auto& t : *terms) s += t.coeff * norm(Vec(t.M * v), t.out_p);
    return s;
  }
  Vec subgradient(const Vec& v) const {
    Vec g = Vec::Zero(v.size());
    for (const auto& t : *terms) {
      const Vec u = t.M * v;
      if (u.cwiseAbs().maxCoeff() == 0.0) continue;
      g += t.coeff * (t.M.transpose() * norm_gradient(u, t.out_p));
    }
    return g;
  }
};

// argmax_{||v||_p = 1} <w, v>: the dual map of the p-ball.
Vec linear_maximizer(const Vec& w, const Exponent& p) {
  const Eigen::Index n = w.size();
  const double m = w.cwiseAbs().maxCoeff();
  if (m == 0.0) return Vec::Zero(n);
  if (p.is_infinity()) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v[i] = w[i] > 0 ? 1.0 : (w[i] < 0 ? -1.0 : 0.0);
    return v;
  }
  if (p.value() == 1.0) {
    Eigen::Index imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    Vec v = Vec::Zero(n);
    v[imax] = w[imax] > 0 ? 1.0 : -1.0;
    return v;
  }
  const double e = 1.0 / (p.value() - 1.0);
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(w[i]) / m;
    v[i] = (w[i] > 0 ? 1.0 : (w[i] < 0 ? -1.0 : 0.0)) * std::pow(r, e);
  }
  return v / norm(v, p);
}

}  // namespace

FrameSystem::FrameSystem(Mat matrix_, SpaceSpec X, SpaceSpec Xd)
    : matrix(std::move(matrix_)), space_X(X), space_Xd(Xd) {
  if (matrix.rows() != space_Xd.dim || matrix.cols() != space_X.dim) {
    throw input_error("frame matrix is " + std::to_string(matrix.rows()) + "x" +
                      std::to_string(matrix.cols()) + " but spaces require " +
                      std::to_string(space_Xd.dim) + "x" +
                      std::to_string(space_X.dim));
  }
  require_finite(matrix, "frame matrix");
}

int numerical_rank(const Mat& M) {
  if (M.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  qr.setThreshold(1e-12);
  return static_cast<int>(qr.rank());
}

SupResult maximize_norm_combination(const std::vector<NormTerm>& all_terms,
                                    const SpaceSpec& in,
                                    const OptimOptions& opts) {
  for (const auto& t : all_terms) {
    if (t.M.cols() != in.dim) {
      throw input_error("norm term expects " + std::to_string(t.M.cols()) +
                        " inputs, space has dim " + std::to_string(in.dim));
    }
    require_finite(t.M, "norm term matrix");
  }

  // coeff·||I v||_in is the constant coeff on the unit sphere; splitting it
  // out keeps the optimizer trajectory independent of such terms.
  std::vector<NormTerm> terms;
  double offset = 0.0;
  for (const auto& t : all_terms) {
    if (t.M.rows() == in.dim && t.out_p == in.p &&
        t.M.isIdentity(0.0)) {
      offset += t.coeff;
    } else {
      terms.push_back(t);
    }
  }
  if (terms.empty()) {
    SupResult r;
    r.value = offset;
    r.arg = sample_unit_sphere(in, 1, opts.seed).front();
    r.evaluations = 1;
    return r;
  }
  Objective obj{&terms};

  const int pool = std::max(256, 4 * opts.restarts);
  std::vector<Vec> candidates = sample_unit_sphere(in, pool, opts.seed);
  if (in.dim <= 8) {
    // Vertices of the l^inf ball are global candidates, and exact maximizers
    // when in.p = inf (convex objective over the cube).
    for (const Vec& s : half_sign_vectors(in.dim))
      candidates.push_back(s / norm(s, in.p));
  }

  struct Scored {
    double f;
    int index;
  };
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    scored.push_back({obj.eval(candidates[i]), i});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.f > b.f;
  });

  Vec best_v = candidates[scored.front().index];
  double best_f = scored.front().f;

  const int starts = std::min<int>(opts.restarts, static_cast<int>(scored.size()));
  for (int s = 0; s < starts; ++s) {
    Vec v = candidates[scored[s].index];
    double f = scored[s].f;
    double alpha = 0.25;
    int stagnant = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      Vec g = obj.subgradient(v);
      const double gn = g.norm();
      if (gn < 1e-300) break;

      // Conditional-gradient step first: exact maximizer of the
      // linearization over the ball, monotone for single-norm objectives
      // and a machine-precision polish near optima. Projected subgradient
      // step as the fallback.
      const double f_before = f;
      bool accepted = false;
      const Vec fw = linear_maximizer(g, in.p);
      if (fw.cwiseAbs().maxCoeff() > 0.0) {
        const double ffw = obj.eval(fw);
        if (ffw > f) {
          v = fw;
          f = ffw;
          accepted = true;
        }
      }
      if (!accepted) {
        Vec trial = v + (alpha / gn) * g;
        const double tn = norm(trial, in.p);
        if (tn >= 1e-300) {
          trial /= tn;
          const double ft = obj.eval(trial);
          if (ft > f) {
            v = trial;
            f = ft;
            alpha = std::min(alpha * 1.5, 1.0);
            accepted = true;
          }
        }
      }
      if (!accepted) {
        alpha *= 0.5;
        if (alpha < 1e-14) break;
        continue;
      }
      if (f - f_before < opts.objective_tol * std::max(1.0, std::abs(f))) {
        if (++stagnant >= 5) break;
      } else {
        stagnant = 0;
      }
    }
    if (f > best_f) {
      best_f = f;
      best_v = v;
    }
  }
  return SupResult{best_f + offset, best_v, obj.evaluations};
}

double op_norm_cheap_upper(const Mat& M, const SpaceSpec& from,
                           const SpaceSpec& to) {
  const int n = from.dim, m = to.dim;
  const Exponent &p = from.p, &q = to.p;
  if (M.size() == 0 || M.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  if (!p.is_infinity() && p.value() == 1.0) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) best = std::max(best, norm(Vec(M.col(j)), q));
    return best;
  }
  if (q.is_infinity()) {
    double best = 0.0;
    const Exponent pd = p.dual();
    for (int i = 0; i < m; ++i)
      best = std::max(best, norm(Vec(M.row(i).transpose()), pd));
    return best;
  }
  if (!p.is_infinity() && p.value() == 2.0 && q.value() == 2.0)
    return sigma_max(M);
  if (p.is_infinity() && n <= 8) {
    double best = 0.0;
    for (const Vec& s : half_sign_vectors(n))
      best = std::max(best, norm(Vec(M * s), q));
    return best;
  }
  if (q.value() == 1.0 && m <= 8) {
    double best = 0.0;
    const Exponent pd = p.dual();
    for (const Vec& s : half_sign_vectors(m))
      best = std::max(best, norm(Vec(M.transpose() * s), pd));
    return best;
  }

  // Norm-nesting relaxations to closed-form cases; take the best.
  double bound = std::numeric_limits<double>::infinity();
  {
    // ||v||_1 <= n^(1 - 1/p) ||v||_p, then the l1 -> q column form.
    double cols = 0.0;
    for (int j = 0; j < n; ++j) cols = std::max(cols, norm(Vec(M.col(j)), q));
    bound = std::min(bound, dim_pow(n, 1.0 - inv_exp(p)) * cols);
  }
  {
    // ||u||_q <= m^(1/q) ||u||_inf, then the p -> inf row form.
    double rows = 0.0;
    const Exponent pd = p.dual();
    for (int i = 0; i < m; ++i)
      rows = std::max(rows, norm(Vec(M.row(i).transpose()), pd));
    bound = std::min(bound, dim_pow(m, inv_exp(q)) * rows);
  }
  {
    // Through the spectral norm.
    const double fac_out = inv_exp(q) > 0.5 ? dim_pow(m, inv_exp(q) - 0.5) : 1.0;
    const double fac_in = inv_exp(p) < 0.5 ? dim_pow(n, 0.5 - inv_exp(p)) : 1.0;
    bound = std::min(bound, fac_out * sigma_max(M) * fac_in);
  }
  return bound;
}

double lower_bound_cheap_under(const Mat& M, const SpaceSpec& from,
                               const SpaceSpec& to) {
  if (numerical_rank(M) < from.dim) return 0.0;
  const double fac_out =
      inv_exp(to.p) < 0.5 ? dim_pow(to.dim, inv_exp(to.p) - 0.5) : 1.0;
  const double fac_in =
      inv_exp(from.p) > 0.5 ? dim_pow(from.dim, 0.5 - inv_exp(from.p)) : 1.0;
  return std::max(0.0, sigma_min(M) * fac_out * fac_in);
}

BoundsEstimate op_norm(const Mat& M, const SpaceSpec& from, const SpaceSpec& to,
                       const OptimOptions& opts) {
  if (M.rows() != to.dim || M.cols() != from.dim) {
    throw input_error("matrix is " + std::to_string(M.rows()) + "x" +
                      std::to_string(M.cols()) + ", expected " +
                      std::to_string(to.dim) + "x" + std::to_string(from.dim));
  }
  require_finite(M, "matrix");

  BoundsEstimate b;
  b.kind = BoundKind::upper_B;
  const Exponent &p = from.p, &q = to.p;

  if (M.cwiseAbs().maxCoeff() == 0.0) {
    b.method = "zero_matrix";
    return b;
  }

  const auto exact = [&](double v, const char* method, long evals) {
    b.value = v;
    b.certified_low = v;
    b.certified_high = v;
    b.evaluations = evals;
    b.method = method;
    return b;
  };

  if (!p.is_infinity() && p.value() == 1.0)
    return exact(op_norm_cheap_upper(M, from, to), "closed_form_l1_columns",
                 from.dim);
  if (q.is_infinity())
    return exact(op_norm_cheap_upper(M, from, to), "closed_form_linf_rows",
                 to.dim);
  if (!p.is_infinity() && p.value() == 2.0 && q.value() == 2.0)
    return exact(sigma_max(M), "svd", 1);
  if (p.is_infinity() && from.dim <= 8)
    return exact(op_norm_cheap_upper(M, from, to), "vertex_enumeration",
                 1L << (from.dim - 1));
  if (q.value() == 1.0 && to.dim <= 8)
    return exact(op_norm_cheap_upper(M, from, to), "sign_enumeration",
                 1L << (to.dim - 1));

  SupResult res = maximize_norm_combination({{1.0, M, q}}, from, opts);
  b.value = res.value;
  b.certified_low = res.value;
  b.certified_high = std::max(res.value, op_norm_cheap_upper(M, from, to));
  b.evaluations = res.evaluations;
  b.method = "projected_gradient_multistart";
  return b;
}

BoundsEstimate lower_bound(const Mat& M, const SpaceSpec& from,
                           const SpaceSpec& to, const OptimOptions& opts) {
  if (M.rows() != to.dim || M.cols() != from.dim) {
    throw input_error("matrix is " + std::to_string(M.rows()) + "x" +
                      std::to_string(M.cols()) + ", expected " +
                      std::to_string(to.dim) + "x" + std::to_string(from.dim));
  }
  require_finite(M, "matrix");

  BoundsEstimate b;
  b.kind = BoundKind::lower_A;

  if (numerical_rank(M) < from.dim) {
    // Nontrivial kernel: the infimum is exactly 0.
    b.method = "rank_deficient";
    return b;
  }
  if (!from.p.is_infinity() && from.p.value() == 2.0 && !to.p.is_infinity() &&
      to.p.value() == 2.0) {
    const double s = sigma_min(M);
    b.value = s;
    b.certified_low = s;
    b.certified_high = s;
    b.evaluations = 1;
    b.method = "svd";
    return b;
  }

  SupResult res = maximize_norm_combination({{-1.0, M, to.p}}, from, opts);
  b.value = -res.value;
  b.certified_high = b.value;
  b.certified_low = std::min(b.value, lower_bound_cheap_under(M, from, to));
  b.evaluations = res.evaluations;
  b.method = "projected_gradient_multistart";
  return b;
}

BoundsEstimate bessel_bound(const FrameSystem& F, const OptimOptions& opts) {
  return op_norm(F.matrix, F.space_X, F.space_Xd, opts);
}

std::pair<BoundsEstimate, BoundsEstimate> frame_bounds(const FrameSystem& F,
                                                       const OptimOptions& opts) {
  BoundsEstimate lo = lower_bound(F.matrix, F.space_X, F.space_Xd, opts);
  BoundsEstimate hi = op_norm(F.matrix, F.space_X, F.space_Xd, opts);
  if (lo.value == 0.0) lo.method += "|not_a_frame";
  return {lo, hi};
}

std::pair<BoundsEstimate, BoundsEstimate> riesz_bounds(const FrameSystem& F,
                                                       const OptimOptions& opts) {
  const Mat S = F.synthesis_matrix();
  BoundsEstimate lo = lower_bound(S, F.synthesis_in(), F.synthesis_out(), opts);
  BoundsEstimate hi = op_norm(S, F.synthesis_in(), F.synthesis_out(), opts);
  if (numerical_rank(S) < F.n()) lo.method += "|not_complete";
  if (lo.value == 0.0) lo.method += "|not_riesz";
  return {lo, hi};
}

std::optional<InvertibilityCertificate> check_neumann_invertibility(
    const Mat& G, const SpaceSpec& s, const OptimOptions& opts) {
  if (G.rows() != G.cols()) throw input_error("operator matrix must be square");
  if (G.rows() != s.dim) {
    throw input_error("operator matrix is " + std::to_string(G.rows()) +
                      "-dimensional, space has dim " + std::to_string(s.dim));
  }
  require_finite(G, "operator matrix");

  const Mat H = G - Mat::Identity(s.dim, s.dim);
  const double n_high = op_norm(H, s, s, opts).certified_high;
  const double g_low = lower_bound(G, s, s, opts).certified_low;
  // inf ||Gx|| over the sphere is at least max(g_low, 1 - n_high).
  const double g_floor = std::max({g_low, 1.0 - n_high, 0.0});

  constexpr double kStrict = 1e-9;
  struct Pair {
    double l1, l2;
  };
  std::vector<Pair> candidates;
  candidates.push_back({n_high, 0.0});
  for (int i = 1; i <= 9; ++i) {
    const double l2 = 0.1 * i;
    // Certified: sup(||Gx - x|| - l2·||Gx||) <= n_high - l2·g_floor.
    candidates.push_back({std::max(0.0, n_high - l2 * g_floor), l2});
  }

  std::optional<Pair> chosen;
  for (const Pair& c : candidates) {
    if (c.l1 >= 1.0 - kStrict || c.l2 >= 1.0 - kStrict) continue;
    if (!chosen) {
      chosen = c;
      continue;
    }
    if (std::max(c.l1, c.l2) < std::max(chosen->l1, chosen->l2)) chosen = c;
  }
  // The lambda2 = 0 pair is preferred whenever it certifies at all.
  if (n_high < 1.0 - kStrict) chosen = Pair{n_high, 0.0};
  if (!chosen) return std::nullopt;

  InvertibilityCertificate cert;
  cert.lambda1 = chosen->l1;
  cert.lambda2 = chosen->l2;
  cert.inverse_lower = (1.0 - cert.lambda2) / (1.0 + cert.lambda1);
  cert.inverse_upper = (1.0 + cert.lambda2) / (1.0 - cert.lambda1);
  return cert;
}

}  // namespace framelab
