#include "framelab/equivalence.hpp"

#include "framelab/oracles.hpp"

#include <cmath>

namespace framelab {

namespace {

constexpr double kSideConditionTol = 1e-9;
constexpr double kPremiseCushion = 1e-3;

bool is_pstar_side(ConditionId id) {
  return id == ConditionId::A6 || id == ConditionId::A6tilde;
}

bool is_coefficient_form(ConditionId id) {
  return id == ConditionId::A12 || id == ConditionId::A13 ||
         id == ConditionId::A3b || id == ConditionId::A3c;
}

bool is_restricted_form(ConditionId id) {
  return id == ConditionId::A9 || id == ConditionId::A9tilde;
}

double sup_value(const std::vector<NormTerm>& terms, const SpaceSpec& in,
                 const VerifyOptions& opts) {
  double v = maximize_norm_combination(terms, in, opts.optim).value;
  if (opts.use_oracle(in.dim)) {
    v = std::max(
        v, brute_combination_sup(terms, in, default_oracle_resolution(in.dim))
               .value);
  }
  return v;
}

// Upper premise bound used by translations: the certified side of the
// relevant Bessel / frame / Riesz upper bound for the source family.
double translation_bound(const EquivalenceInstance& inst, ConditionId from,
                         const VerifyOptions& opts) {
  const FrameSystem& F = inst.base;
  BoundsEstimate est;
  if (is_pstar_side(from)) {
    // X_d-frame upper bound of {g_i}.
    est = op_norm(F.matrix, F.space_X, F.space_Xd, opts.optim);
  } else if (is_coefficient_form(from)) {
    // X_d*-Bessel bound in the analysis form X* -> X_d*.
    est = op_norm(F.matrix, dual_space(F.space_X), dual_space(F.space_Xd),
                  opts.optim);
  } else if (is_restricted_form(from)) {
    // Upper frame bound of the coefficient family {g_i}.
    if (!inst.coefficients) {
      throw input_error("A9-style conditions need the coefficient family");
    }
    est = op_norm(inst.coefficients->matrix, inst.coefficients->space_X,
                  inst.coefficients->space_Xd, opts.optim);
  } else {
    // (P)-side synthesis bound of {f_i}: X_d -> X.
    est = op_norm(F.synthesis_matrix(), F.synthesis_in(), F.synthesis_out(),
                  opts.optim);
  }
  return est.exact() ? est.value : est.value * (1.0 + kPremiseCushion);
}

}  // namespace

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::A1: return "A1";
    case ConditionId::A11: return "A11";
    case ConditionId::A12: return "A12";
    case ConditionId::A13: return "A13";
    case ConditionId::A3: return "A3";
    case ConditionId::A3a: return "A3a";
    case ConditionId::A3b: return "A3b";
    case ConditionId::A3c: return "A3c";
    case ConditionId::A6: return "A6";
    case ConditionId::A6tilde: return "A6tilde";
    case ConditionId::A8: return "A8";
    case ConditionId::A8tilde: return "A8tilde";
    case ConditionId::A9: return "A9";
    case ConditionId::A9tilde: return "A9tilde";
  }
  return "unknown";
}

ConditionId parse_condition_id(const std::string& s) {
  static const std::map<std::string, ConditionId> table = {
      {"A1", ConditionId::A1},         {"A11", ConditionId::A11},
      {"A12", ConditionId::A12},       {"A13", ConditionId::A13},
      {"A3", ConditionId::A3},         {"A3a", ConditionId::A3a},
      {"A3b", ConditionId::A3b},       {"A3c", ConditionId::A3c},
      {"A6", ConditionId::A6},         {"A6tilde", ConditionId::A6tilde},
      {"A8", ConditionId::A8},         {"A8tilde", ConditionId::A8tilde},
      {"A9", ConditionId::A9},         {"A9tilde", ConditionId::A9tilde},
  };
  auto it = table.find(s);
  if (it == table.end()) throw input_error("unknown condition id: " + s);
  return it->second;
}

PerturbationConstants translate_constants(ConditionId from, ConditionId to,
                                          const PerturbationConstants& k,
                                          double B) {
  if (!(B >= 0.0)) throw input_error("translation requires B >= 0");
  if ((from == ConditionId::A1 && to == ConditionId::A11) ||
      (from == ConditionId::A13 && to == ConditionId::A12)) {
    return PerturbationConstants(delta(B, k), 0.0, 0.0);
  }
  if ((from == ConditionId::A6 && to == ConditionId::A6tilde) ||
      (from == ConditionId::A8 && to == ConditionId::A8tilde)) {
    return PerturbationConstants(k.mu + k.lambda1 * B, 0.0, k.lambda2);
  }
  if (from == ConditionId::A9 && to == ConditionId::A9tilde) {
    return PerturbationConstants(0.0, k.lambda1 + k.mu * B, k.lambda2);
  }
  throw input_error("unsupported translation " + to_string(from) + " -> " +
                    to_string(to));
}

double condition_residual(const EquivalenceInstance& inst, ConditionId cond,
                          const PerturbationConstants& k,
                          const VerifyOptions& opts) {
  const FrameSystem& F = inst.base;
  const FrameSystem& Psi = inst.pert;
  if (F.space_X != Psi.space_X || F.space_Xd != Psi.space_Xd) {
    throw input_error("equivalence instance: systems live in different spaces");
  }

  switch (cond) {
    case ConditionId::A1:
    case ConditionId::A3:
    case ConditionId::A11:
    case ConditionId::A3a:
    case ConditionId::A8:
    case ConditionId::A8tilde:
      return sup_value(p_residual_terms(F, Psi, k), F.synthesis_in(), opts);

    case ConditionId::A6:
    case ConditionId::A6tilde:
      return sup_value(pstar_residual_terms(F, Psi, k), F.synthesis_dual_in(),
                       opts);

    case ConditionId::A12:
    case ConditionId::A13:
    case ConditionId::A3b:
    case ConditionId::A3c: {
      // Coefficient form over the dual unit sphere of X:
      // ||{g(psi_i - f_i)}||_{Xd*} - mu||g|| - lambda1||{g(f_i)}||
      //                            - lambda2||{g(psi_i)}||.
      if (cond == ConditionId::A3c && k.lambda2 == 0.0) {
        throw input_error(
            "condition (c) of the frame equivalence requires lambda2 > 0");
      }
      const SpaceSpec in = dual_space(F.space_X);
      const Exponent out = dual_space(F.space_Xd).p;
      std::vector<NormTerm> terms;
      terms.push_back({1.0, Psi.matrix - F.matrix, out});
      if (k.mu != 0.0)
        terms.push_back({-k.mu, Mat::Identity(in.dim, in.dim), in.p});
      if (k.lambda1 != 0.0) terms.push_back({-k.lambda1, F.matrix, out});
      if (k.lambda2 != 0.0) terms.push_back({-k.lambda2, Psi.matrix, out});
      return sup_value(terms, in, opts);
    }

    case ConditionId::A9:
    case ConditionId::A9tilde: {
      if (!inst.coefficients) {
        throw input_error("A9-style conditions need the coefficient family");
      }
      const Mat& G = inst.coefficients->matrix;
      const SpaceSpec& X = F.space_X;
      std::vector<NormTerm> terms;
      terms.push_back({1.0, (Psi.matrix - F.matrix).transpose() * G, X.p});
      if (k.mu != 0.0) terms.push_back({-k.mu, G, F.space_Xd.p});
      if (k.lambda1 != 0.0)
        terms.push_back({-k.lambda1, Mat::Identity(X.dim, X.dim), X.p});
      if (k.lambda2 != 0.0)
        terms.push_back({-k.lambda2, Psi.synthesis_matrix() * G, X.p});
      return sup_value(terms, X, opts);
    }
  }
  throw input_error("unknown condition id");
}

EquivalenceReport check_equivalence(const EquivalenceInstance& inst,
                                    ConditionId cond_a,
                                    const PerturbationConstants& k_a,
                                    ConditionId cond_b,
                                    const VerifyOptions& opts) {
  EquivalenceReport rep;
  rep.cond_a = cond_a;
  rep.cond_b = cond_b;
  rep.k_a = k_a;

  rep.bound_B = translation_bound(inst, cond_a, opts);
  rep.extras["bound_B"] = rep.bound_B;

  // Side conditions of the conditional equivalences.
  if (cond_a == ConditionId::A6) {
    if (!inst.reconstruction) {
      throw input_error("A6 equivalence needs the reconstruction operator S");
    }
    const BoundsEstimate sn =
        op_norm(*inst.reconstruction, inst.base.space_Xd, inst.base.space_X,
                opts.optim);
    const double dev = std::abs(sn.value - 1.0 / rep.bound_B);
    rep.extras["S_norm"] = sn.value;
    MarginCheck side;
    side.name = "S_norm_equals_inv_B";
    side.margin = -dev;
    side.tolerance = kSideConditionTol;
    side.satisfied = dev <= kSideConditionTol;
    rep.side_conditions.push_back(side);
    if (!side.satisfied) {
      throw input_error("side condition ||S|| = 1/B fails (deviation " +
                        std::to_string(dev) + ")");
    }
  }
  if (cond_a == ConditionId::A8) {
    const FrameSystem& F = inst.base;
    const BoundsEstimate lo = lower_bound(F.synthesis_matrix(),
                                          F.synthesis_in(), F.synthesis_out(),
                                          opts.optim);
    const BoundsEstimate hi = op_norm(F.synthesis_matrix(), F.synthesis_in(),
                                      F.synthesis_out(), opts.optim);
    const double dev = std::abs(hi.value - lo.value);
    rep.extras["riesz_A"] = lo.value;
    rep.extras["riesz_B"] = hi.value;
    MarginCheck side;
    side.name = "A_equals_B";
    side.margin = -dev;
    side.tolerance = kSideConditionTol * std::max(1.0, hi.value);
    side.satisfied = dev <= side.tolerance;
    rep.side_conditions.push_back(side);
    if (!side.satisfied) {
      throw input_error("side condition A = B fails (A = " +
                        std::to_string(lo.value) + ", B = " +
                        std::to_string(hi.value) + ")");
    }
  }

  rep.residual_a = condition_residual(inst, cond_a, k_a, opts);
  rep.cond_a_certified = rep.residual_a <= opts.tol_residual;

  rep.k_b = translate_constants(cond_a, cond_b, k_a, rep.bound_B);
  rep.residual_b = condition_residual(inst, cond_b, rep.k_b, opts);
  rep.cond_b_certified = rep.residual_b <= opts.tol_residual;

  rep.ok = rep.cond_a_certified && rep.cond_b_certified;
  return rep;
}

MuThresholdReport check_frame_mu_threshold(const FrameSystem& F,
                                           const FrameSystem& Psi,
                                           const VerifyOptions& opts) {
  if (F.space_X != Psi.space_X || F.space_Xd != Psi.space_Xd) {
    throw input_error("mu threshold: systems live in different spaces");
  }
  // X_d*-frame bounds of {f_i} for X*: analysis X* -> X_d*.
  const SpaceSpec Xstar = dual_space(F.space_X);
  const SpaceSpec Xdstar = dual_space(F.space_Xd);
  const BoundsEstimate alo = lower_bound(F.matrix, Xstar, Xdstar, opts.optim);
  const BoundsEstimate bhi = op_norm(F.matrix, Xstar, Xdstar, opts.optim);
  if (alo.value == 0.0) {
    throw input_error("not a frame: analysis map has a nontrivial kernel");
  }

  MuThresholdReport rep;
  rep.A = alo.value;
  rep.B = bhi.value;
  rep.mu_star =
      std::max(0.0, op_norm(Mat(Psi.matrix - F.matrix), Xstar, Xdstar,
                            opts.optim)
                        .value);
  rep.extras["mu_star"] = rep.mu_star;

  rep.threshold.name = "mu_star_lt_A";
  rep.threshold.margin = rep.A - rep.mu_star;
  rep.threshold.tolerance = opts.eps_hyp;
  rep.threshold.satisfied = rep.threshold.margin > opts.eps_hyp;
  rep.threshold.boundary =
      rep.threshold.margin >= 0.0 && rep.threshold.margin <= opts.eps_hyp;
  rep.applicable = rep.threshold.satisfied;

  if (rep.applicable) {
    rep.psi_lower = lower_bound(Psi.matrix, Xstar, Xdstar, opts.optim);
    rep.psi_lower_cmp = rep.psi_lower.value;
    if (opts.use_oracle(Xstar.dim) && !rep.psi_lower.exact()) {
      rep.psi_lower_cmp =
          std::min(rep.psi_lower_cmp,
                   brute_lower_bound(Psi.matrix, Xstar, Xdstar,
                                     default_oracle_resolution(Xstar.dim))
                       .value);
    }
    const double predicted = rep.A - rep.mu_star;
    rep.extras["predicted_lower"] = predicted;
    rep.lower_bound_verified =
        rep.psi_lower_cmp >=
        predicted - (opts.tol_bound_abs + opts.tol_bound_rel * predicted);
  }
  return rep;
}

}  // namespace framelab
