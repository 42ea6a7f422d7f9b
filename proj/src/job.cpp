#include "framelab/job.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace framelab {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kMatrixNames = {"G",   "Phi",     "F", "Psi",
                                            "S",   "S_tilde", "P"};
const std::set<std::string> kTheoremAnalyses = {
    "bessel_3_1",     "frame_3_3", "banach_frame_3_6", "banach_frame_proj_3_7",
    "riesz_3_8",      "atomic_3_9", "atomic_3_10",     "operator_pert_cc",
    "hilbert_1_1"};
const std::set<std::string> kOtherAnalyses = {"equivalence", "mu_threshold",
                                              "neumann", "frame_bounds",
                                              "sweep"};

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

Exponent parse_exponent(const json& v, const std::string& field) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Inf" || s == "infinity") return Exponent::infinity();
    throw input_error(field + ": expected a number >= 1 or \"inf\", got \"" + s +
                      "\"");
  }
  if (v.is_number()) {
    try {
      return Exponent::finite(v.get<double>());
    } catch (const input_error& e) {
      throw input_error(field + ": " + e.what());
    }
  }
  throw input_error(field + ": expected a number >= 1 or \"inf\"");
}

SpaceSpec parse_space(const json& j, const std::string& field,
                      const char* exp_key, const char* exp_key_alt) {
  if (!j.is_object() || !j.contains("dim")) {
    throw input_error(field + ": expected an object with \"dim\"");
  }
  const int dim = j.at("dim").get<int>();
  const json* e = nullptr;
  if (j.contains(exp_key)) {
    e = &j.at(exp_key);
  } else if (j.contains(exp_key_alt)) {
    e = &j.at(exp_key_alt);
  } else {
    throw input_error(field + ": missing exponent \"" + exp_key + "\"");
  }
  return SpaceSpec(dim, parse_exponent(*e, field + "." + exp_key));
}

Mat parse_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) {
    throw input_error("matrices." + field + ": expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw input_error("matrices." + field + " row 0: expected a non-empty array");
  }
  const std::size_t cols = j[0].size();
  Mat M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw input_error("matrices." + field + " row " + std::to_string(i) +
                        ": expected " + std::to_string(cols) + " entries, got " +
                        std::to_string(j[i].is_array() ? j[i].size() : 0));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) {
        throw input_error("matrices." + field + " row " + std::to_string(i) +
                          " column " + std::to_string(c) + ": expected a number");
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          j[i][c].get<double>();
    }
  }
  require_finite(M, "matrices." + field);
  return M;
}

std::string iso_timestamp() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

ordered_json space_to_json(const SpaceSpec& s) {
  ordered_json j;
  j["dim"] = s.dim;
  if (s.p.is_infinity()) {
    j["p"] = "inf";
  } else {
    j["p"] = s.p.value();
  }
  return j;
}

ordered_json bounds_to_json(const BoundsEstimate& b) {
  ordered_json j;
  j["value"] = b.value;
  j["kind"] = b.kind == BoundKind::upper_B ? "upper_B" : "lower_A";
  j["certified_low"] = b.certified_low;
  j["certified_high"] = b.certified_high;
  j["evaluations"] = b.evaluations;
  j["method"] = b.method;
  return j;
}

ordered_json margins_to_json(const std::vector<MarginCheck>& margins) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : margins) {
    ordered_json e;
    e["name"] = m.name;
    e["margin"] = m.margin;
    e["tolerance"] = m.tolerance;
    e["satisfied"] = m.satisfied;
    e["boundary"] = m.boundary;
    arr.push_back(e);
  }
  return arr;
}

ordered_json constants_to_json(const PerturbationConstants& k) {
  ordered_json j;
  j["mu"] = k.mu;
  j["lambda1"] = k.lambda1;
  j["lambda2"] = k.lambda2;
  return j;
}

}  // namespace

ordered_json report_to_json(const TheoremReport& r) {
  ordered_json j;
  j["theorem_id"] = to_string(r.theorem_id);
  j["verdict"] = to_string(r.verdict);
  j["hypothesis_holds"] = r.hypothesis_holds;
  j["margins"] = margins_to_json(r.margins);
  j["constants"] = constants_to_json(r.constants);
  j["residual"] = r.residual;
  j["delta"] = r.delta;
  j["predicted_lower"] = r.predicted_lower;
  j["predicted_upper"] = r.predicted_upper;
  j["actual_lower"] = bounds_to_json(r.actual_lower);
  j["actual_upper"] = bounds_to_json(r.actual_upper);
  ordered_json extras;
  for (const auto& [k, v] : r.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

const Mat& JobSpec::matrix(const std::string& name) const {
  auto it = matrices.find(name);
  if (it == matrices.end()) {
    throw input_error("analysis \"" + analysis + "\" requires matrices." + name);
  }
  return it->second;
}

FrameSystem JobSpec::system(const std::string& name) const {
  try {
    return FrameSystem(matrix(name), X, Xd);
  } catch (const input_error& e) {
    throw input_error("matrices." + name + ": " + e.what());
  }
}

JobSpec parse_job_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(std::string("job file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw input_error("job file must be a JSON object");

  static const std::set<std::string> known = {
      "schema_version", "seed",        "analysis", "spaces",   "matrices",
      "constants",      "mode",        "equivalence", "sweep", "hilbert",
      "tolerances",     "oracle",      "max_delta"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw input_error("unknown job field \"" + key + "\"");
  }

  JobSpec job;
  if (j.contains("schema_version")) {
    job.schema_version = j["schema_version"].get<int>();
    if (job.schema_version != 1) {
      throw input_error("unsupported schema_version " +
                        std::to_string(job.schema_version));
    }
  }
  if (j.contains("seed")) job.seed = j["seed"].get<std::uint64_t>();

  if (!j.contains("analysis") || !j["analysis"].is_string()) {
    throw input_error("missing required field \"analysis\"");
  }
  job.analysis = j["analysis"].get<std::string>();
  if (!kTheoremAnalyses.count(job.analysis) && !kOtherAnalyses.count(job.analysis)) {
    throw input_error("unknown analysis \"" + job.analysis + "\"");
  }

  if (!j.contains("spaces") || !j["spaces"].is_object()) {
    throw input_error("missing required field \"spaces\"");
  }
  if (!j["spaces"].contains("X") || !j["spaces"].contains("Xd")) {
    throw input_error("spaces must contain \"X\" and \"Xd\"");
  }
  job.X = parse_space(j["spaces"]["X"], "spaces.X", "p", "q");
  job.Xd = parse_space(j["spaces"]["Xd"], "spaces.Xd", "q", "p");

  if (j.contains("matrices")) {
    if (!j["matrices"].is_object()) {
      throw input_error("matrices must be an object of named matrices");
    }
    for (const auto& [name, value] : j["matrices"].items()) {
      if (!kMatrixNames.count(name)) {
        throw input_error("unknown matrix name \"" + name + "\"");
      }
      job.matrices[name] = parse_matrix(value, name);
    }
  }

  if (j.contains("constants")) {
    const json& c = j["constants"];
    if (!c.is_object()) throw input_error("constants must be an object");
    const auto get = [&](const char* a, const char* b) {
      if (c.contains(a)) return c[a].get<double>();
      if (c.contains(b)) return c[b].get<double>();
      return 0.0;
    };
    try {
      job.constants = PerturbationConstants(
          get("mu", "nu"), get("lambda1", "beta1"), get("lambda2", "beta2"));
    } catch (const input_error& e) {
      throw input_error(std::string("constants: ") + e.what());
    }
    job.constants_given = true;
  }

  if (j.contains("mode")) {
    job.atomic_mode = j["mode"].get<std::string>();
    if (*job.atomic_mode != "full_A9" && *job.atomic_mode != "truncated_A10") {
      throw input_error("mode must be \"full_A9\" or \"truncated_A10\"");
    }
  }
  if (j.contains("equivalence")) {
    const json& e = j["equivalence"];
    if (!e.is_object() || !e.contains("from") || !e.contains("to")) {
      throw input_error("equivalence must be an object with \"from\" and \"to\"");
    }
    job.equivalence_from = e["from"].get<std::string>();
    job.equivalence_to = e["to"].get<std::string>();
  }
  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object() || !s.contains("parameter") || !s.contains("from") ||
        !s.contains("to") || !s.contains("steps")) {
      throw input_error(
          "sweep must be an object with parameter, from, to, steps");
    }
    SweepSpec sw;
    sw.parameter = s["parameter"].get<std::string>();
    if (sw.parameter != "mu" && sw.parameter != "lambda1" &&
        sw.parameter != "lambda2" && sw.parameter != "scale") {
      throw input_error("sweep.parameter must be mu, lambda1, lambda2 or scale");
    }
    sw.from = s["from"].get<double>();
    sw.to = s["to"].get<double>();
    sw.steps = s["steps"].get<int>();
    if (sw.steps < 1) throw input_error("sweep.steps must be >= 1");
    if (s.contains("analysis")) sw.analysis = s["analysis"].get<std::string>();
    job.sweep = sw;
  }
  if (j.contains("hilbert")) {
    const json& h = j["hilbert"];
    if (h.contains("A")) job.hilbert_A = h["A"].get<double>();
    if (h.contains("B")) job.hilbert_B = h["B"].get<double>();
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (t.contains("residual"))
      job.options.tol_residual = t["residual"].get<double>();
    if (t.contains("bound_abs"))
      job.options.tol_bound_abs = t["bound_abs"].get<double>();
    if (t.contains("bound_rel"))
      job.options.tol_bound_rel = t["bound_rel"].get<double>();
    if (t.contains("hyp_eps")) job.options.eps_hyp = t["hyp_eps"].get<double>();
  }
  if (j.contains("oracle")) {
    const std::string o = j["oracle"].get<std::string>();
    if (o == "auto") {
      job.options.oracle = VerifyOptions::Oracle::automatic;
    } else if (o == "on") {
      job.options.oracle = VerifyOptions::Oracle::on;
    } else if (o == "off") {
      job.options.oracle = VerifyOptions::Oracle::off;
    } else {
      throw input_error("oracle must be auto, on or off");
    }
  }
  if (j.contains("max_delta")) {
    job.options.max_delta = j["max_delta"].get<double>();
  }
  job.options.optim.seed = job.seed;
  return job;
}

JobSpec parse_job_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open job file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_job_text(ss.str());
}

namespace {

struct RequiredInputs {
  std::vector<std::string> names;
};

std::vector<std::string> required_matrices(const JobSpec& job,
                                           const std::string& analysis) {
  if (analysis == "hilbert_1_1") {
    // formula-only evaluation when the squared bounds are given directly
    if (job.hilbert_A && job.hilbert_B && !job.has_matrix("G")) return {};
    return {"G", "Phi"};
  }
  if (analysis == "bessel_3_1" || analysis == "frame_3_3") {
    return {"G", "Phi"};
  }
  if (analysis == "banach_frame_3_6") return {"G", "Phi"};  // S optional
  if (analysis == "banach_frame_proj_3_7") return {"G", "Phi", "P"};
  if (analysis == "riesz_3_8") return {"F", "Psi"};
  if (analysis == "atomic_3_9" || analysis == "atomic_3_10")
    return {"G", "F", "Psi"};
  if (analysis == "operator_pert_cc") return {"G", "S", "S_tilde"};
  if (analysis == "mu_threshold") return {"F", "Psi"};
  if (analysis == "neumann" || analysis == "frame_bounds") return {"G"};
  if (analysis == "equivalence") return {};  // pair-dependent
  return {};
}

void require_inputs(const JobSpec& job, const std::string& analysis) {
  for (const auto& name : required_matrices(job, analysis)) {
    if (!job.has_matrix(name)) {
      throw input_error("analysis \"" + analysis + "\" requires matrices." +
                        name);
    }
  }
  if (kTheoremAnalyses.count(analysis) && !job.constants_given &&
      analysis != "hilbert_1_1") {
    throw input_error("analysis \"" + analysis + "\" requires constants");
  }
  if (analysis == "equivalence") {
    if (!job.equivalence_from || !job.equivalence_to) {
      throw input_error("analysis \"equivalence\" requires the equivalence "
                        "{from, to} block");
    }
    if (!job.constants_given) {
      throw input_error("analysis \"equivalence\" requires constants");
    }
  }
  // Shape validation through the FrameSystem constructors.
  for (const auto& [name, M] : job.matrices) {
    if (name == "G" || name == "Phi" || name == "F" || name == "Psi") {
      FrameSystem check(M, job.X, job.Xd);
      (void)check;
    } else if (name == "S" || name == "S_tilde") {
      if (M.rows() != job.X.dim || M.cols() != job.Xd.dim) {
        throw input_error("matrices." + name + " must be " +
                          std::to_string(job.X.dim) + "x" +
                          std::to_string(job.Xd.dim));
      }
    } else if (name == "P") {
      if (M.rows() != job.Xd.dim || M.cols() != job.Xd.dim) {
        throw input_error("matrices.P must be " + std::to_string(job.Xd.dim) +
                          "x" + std::to_string(job.Xd.dim));
      }
    }
  }
  if (analysis == "neumann") {
    const Mat& G = job.matrix("G");
    if (G.rows() != G.cols()) {
      throw input_error("analysis \"neumann\" requires a square matrices.G");
    }
  }
}

TheoremReport run_theorem(const JobSpec& job, const std::string& analysis,
                          ordered_json* notes) {
  const VerifyOptions& opts = job.options;
  const PerturbationConstants& k = job.constants;
  if (analysis == "bessel_3_1") {
    return verify_bessel_perturbation(job.system("G"), job.system("Phi"), k, opts);
  }
  if (analysis == "frame_3_3") {
    return verify_frame_perturbation(job.system("G"), job.system("Phi"), k, opts);
  }
  if (analysis == "banach_frame_3_6") {
    Mat S;
    if (job.has_matrix("S")) {
      S = job.matrix("S");
    } else {
      S = pseudo_inverse(job.matrix("G"));
      if (notes) (*notes)["S_default"] = "pseudo_inverse";
    }
    return verify_banach_frame_perturbation(job.system("G"), job.system("Phi"),
                                            S, k, opts);
  }
  if (analysis == "banach_frame_proj_3_7") {
    return verify_banach_frame_projection(job.system("G"), job.system("Phi"),
                                          job.matrix("P"), k, opts);
  }
  if (analysis == "riesz_3_8") {
    return verify_riesz_perturbation(job.system("F"), job.system("Psi"), k, opts);
  }
  if (analysis == "atomic_3_9" || analysis == "atomic_3_10") {
    AtomicMode mode = analysis == "atomic_3_10" ? AtomicMode::truncated_A10
                                                : AtomicMode::full_A9;
    if (job.atomic_mode) {
      mode = *job.atomic_mode == "truncated_A10" ? AtomicMode::truncated_A10
                                                 : AtomicMode::full_A9;
    }
    return verify_atomic_decomposition_perturbation(
        job.system("G"), job.system("F"), job.system("Psi"), k, mode, opts);
  }
  if (analysis == "operator_pert_cc") {
    return verify_operator_perturbation_cc(job.system("G"), job.matrix("S"),
                                           job.matrix("S_tilde"), k, opts);
  }
  if (analysis == "hilbert_1_1") {
    if (job.hilbert_A && job.hilbert_B && !job.has_matrix("G")) {
      TheoremReport r;
      r.theorem_id = TheoremId::hilbert_1_1;
      r.constants = k;
      const auto [lo, hi] = hilbert_bounds_1_1(*job.hilbert_A, *job.hilbert_B, k);
      r.predicted_lower = lo;
      r.predicted_upper = hi;
      r.hypothesis_holds = true;
      r.verdict = Verdict::verified;
      if (notes) (*notes)["mode"] = "formula_only";
      return r;
    }
    return verify_hilbert_frame_perturbation(job.system("G"), job.system("Phi"),
                                             k, opts);
  }
  throw input_error("analysis \"" + analysis + "\" is not a theorem analysis");
}

ordered_json equivalence_to_json(const EquivalenceReport& rep) {
  ordered_json j;
  j["cond_a"] = to_string(rep.cond_a);
  j["cond_b"] = to_string(rep.cond_b);
  j["constants_a"] = constants_to_json(rep.k_a);
  j["constants_b"] = constants_to_json(rep.k_b);
  j["residual_a"] = rep.residual_a;
  j["residual_b"] = rep.residual_b;
  j["bound_B"] = rep.bound_B;
  j["side_conditions"] = margins_to_json(rep.side_conditions);
  j["cond_a_certified"] = rep.cond_a_certified;
  j["cond_b_certified"] = rep.cond_b_certified;
  j["verdict"] = rep.ok ? "verified" : "not_certified";
  ordered_json extras;
  for (const auto& [k, v] : rep.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

ordered_json run_equivalence(const JobSpec& job) {
  const ConditionId from = parse_condition_id(*job.equivalence_from);
  const ConditionId to = parse_condition_id(*job.equivalence_to);
  const bool pstar = from == ConditionId::A6 || from == ConditionId::A6tilde;
  const char* base_name = pstar ? "G" : "F";
  const char* pert_name = pstar ? "Phi" : "Psi";
  if (!job.has_matrix(base_name) || !job.has_matrix(pert_name)) {
    throw input_error("equivalence " + to_string(from) + " -> " + to_string(to) +
                      " requires matrices." + base_name + " and matrices." +
                      pert_name);
  }
  EquivalenceInstance inst{job.system(base_name), job.system(pert_name),
                           std::nullopt, std::nullopt};
  if (job.has_matrix("S")) inst.reconstruction = job.matrix("S");
  if (from == ConditionId::A9 || from == ConditionId::A9tilde) {
    if (!job.has_matrix("G")) {
      throw input_error("A9-style equivalence requires matrices.G");
    }
    inst.coefficients = job.system("G");
  }
  return equivalence_to_json(
      check_equivalence(inst, from, job.constants, to, job.options));
}

ordered_json run_mu_threshold(const JobSpec& job) {
  const MuThresholdReport rep =
      check_frame_mu_threshold(job.system("F"), job.system("Psi"), job.options);
  ordered_json j;
  j["A"] = rep.A;
  j["B"] = rep.B;
  j["mu_star"] = rep.mu_star;
  j["applicable"] = rep.applicable;
  j["threshold"] = margins_to_json({rep.threshold});
  if (rep.applicable) {
    j["psi_lower"] = bounds_to_json(rep.psi_lower);
    j["psi_lower_cmp"] = rep.psi_lower_cmp;
    j["verdict"] = rep.lower_bound_verified ? "verified" : "bound_violated";
  } else {
    j["verdict"] = "not_applicable";
  }
  ordered_json extras;
  for (const auto& [k, v] : rep.extras) extras[k] = v;
  j["extras"] = extras;
  return j;
}

ordered_json run_neumann(const JobSpec& job) {
  ordered_json j;
  const auto cert =
      check_neumann_invertibility(job.matrix("G"), job.X, job.options.optim);
  j["certified"] = cert.has_value();
  if (cert) {
    j["lambda1"] = cert->lambda1;
    j["lambda2"] = cert->lambda2;
    j["inverse_lower"] = cert->inverse_lower;
    j["inverse_upper"] = cert->inverse_upper;
  }
  return j;
}

ordered_json run_frame_bounds(const JobSpec& job) {
  ordered_json j;
  const auto emit = [&](const char* name) {
    const FrameSystem sys = job.system(name);
    auto [lo, hi] = frame_bounds(sys, job.options.optim);
    ordered_json e;
    e["lower"] = bounds_to_json(lo);
    e["upper"] = bounds_to_json(hi);
    auto [rlo, rhi] = riesz_bounds(sys, job.options.optim);
    e["riesz_lower"] = bounds_to_json(rlo);
    e["riesz_upper"] = bounds_to_json(rhi);
    j[name] = e;
  };
  emit("G");
  if (job.has_matrix("Phi")) emit("Phi");
  return j;
}

struct SweepRow {
  double param = 0.0;
  double pred_lower = std::numeric_limits<double>::quiet_NaN();
  double pred_upper = std::numeric_limits<double>::quiet_NaN();
  double act_lower = std::numeric_limits<double>::quiet_NaN();
  double act_upper = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;
};

std::string sweep_scaled_matrix_name(const std::string& analysis) {
  if (analysis == "riesz_3_8" || analysis == "atomic_3_9" ||
      analysis == "atomic_3_10") {
    return "Psi";
  }
  if (analysis == "operator_pert_cc") return "S_tilde";
  return "Phi";
}

std::string sweep_base_matrix_name(const std::string& analysis) {
  if (analysis == "riesz_3_8" || analysis == "atomic_3_9" ||
      analysis == "atomic_3_10") {
    return "F";
  }
  if (analysis == "operator_pert_cc") return "S";
  return "G";
}

std::vector<SweepRow> run_sweep(const JobSpec& job, const std::string& analysis,
                                ordered_json* steps_json) {
  const SweepSpec& sw = *job.sweep;
  std::vector<SweepRow> rows;
  for (int i = 0; i < sw.steps; ++i) {
    const double t = sw.steps == 1
                         ? sw.from
                         : sw.from + (sw.to - sw.from) * i / (sw.steps - 1);
    JobSpec step = job;
    if (sw.parameter == "mu") {
      step.constants.mu = t;
    } else if (sw.parameter == "lambda1") {
      step.constants.lambda1 = t;
    } else if (sw.parameter == "lambda2") {
      step.constants.lambda2 = t;
    } else {  // scale: interpolate the perturbed family toward the base one
      const std::string pert = sweep_scaled_matrix_name(analysis);
      const std::string base = sweep_base_matrix_name(analysis);
      if (!job.has_matrix(pert) || !job.has_matrix(base)) {
        throw input_error("sweep parameter \"scale\" requires matrices." + base +
                          " and matrices." + pert);
      }
      step.matrices[pert] =
          job.matrix(base) + t * (job.matrix(pert) - job.matrix(base));
    }
    if (step.constants.mu < 0 || step.constants.lambda1 < 0 ||
        step.constants.lambda2 < 0) {
      throw input_error("sweep drives a constant negative at step " +
                        std::to_string(i));
    }
    const TheoremReport rep = run_theorem(step, analysis, nullptr);
    SweepRow row;
    row.param = t;
    row.pred_lower = rep.predicted_lower;
    row.pred_upper = rep.predicted_upper;
    if (auto it = rep.extras.find("actual_lower_cmp"); it != rep.extras.end()) {
      row.act_lower = it->second;
    }
    if (auto it = rep.extras.find("actual_upper_cmp"); it != rep.extras.end()) {
      row.act_upper = it->second;
    }
    row.verdict = to_string(rep.verdict);
    rows.push_back(row);
    if (steps_json) {
      ordered_json e = report_to_json(rep);
      e["param"] = t;
      steps_json->push_back(e);
    }
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  out << "param,pred_lower,pred_upper,act_lower,act_upper,verdict\n";
  for (const auto& r : rows) {
    out << fmt_double(r.param) << ',' << fmt_double(r.pred_lower) << ','
        << fmt_double(r.pred_upper) << ',' << fmt_double(r.act_lower) << ','
        << fmt_double(r.act_upper) << ',' << r.verdict << '\n';
  }
}

void write_sweep_svg(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows,
                     const std::string& parameter) {
  const double W = 720, H = 480, ml = 70, mr = 160, mt = 40, mb = 50;
  double xmin = rows.front().param, xmax = rows.back().param;
  if (xmax == xmin) xmax = xmin + 1.0;
  double ymin = 0.0, ymax = 1.0;
  bool has_y = false;
  const auto see = [&](double v) {
    if (!std::isfinite(v)) return;
    if (!has_y) {
      ymin = ymax = v;
      has_y = true;
    } else {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  };
  for (const auto& r : rows) {
    see(r.pred_lower);
    see(r.pred_upper);
    see(r.act_lower);
    see(r.act_upper);
  }
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  const auto py = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">" << parameter
      << "</text>\n";
  out << "<text x=\"" << ml << "\" y=\"" << H - mb + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_double(xmin)
      << "</text>\n";
  out << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_double(xmax)
      << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymin)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(ymin)
      << "</text>\n";
  out << "<text x=\"" << ml - 6 << "\" y=\"" << py(ymax)
      << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(ymax)
      << "</text>\n";

  struct Series {
    const char* name;
    const char* color;
    double SweepRow::* field;
  };
  const Series series[] = {
      {"pred_lower", "#1f77b4", &SweepRow::pred_lower},
      {"pred_upper", "#ff7f0e", &SweepRow::pred_upper},
      {"act_lower", "#2ca02c", &SweepRow::act_lower},
      {"act_upper", "#d62728", &SweepRow::act_upper},
  };
  int legend_i = 0;
  for (const auto& s : series) {
    std::ostringstream pts;
    bool any = false;
    for (const auto& r : rows) {
      const double v = r.*(s.field);
      if (!std::isfinite(v)) continue;
      pts << px(r.param) << ',' << py(v) << ' ';
      any = true;
    }
    if (any) {
      out << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
    }
    const double ly = mt + 18 * legend_i++;
    out << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly << "\" x2=\""
        << W - mr + 34 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - mr + 40 << "\" y=\"" << ly + 4
        << "\" font-size=\"12\">" << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

void write_text_report(const std::filesystem::path& path, const JobSpec& job,
                       const ordered_json& result,
                       const std::vector<SweepRow>* sweep_rows) {
  std::ofstream out(path);
  out << "framelab report\n";
  out << "analysis: " << job.analysis << "\n";
  out << "spaces: X(dim=" << job.X.dim << ", p=" << job.X.p.str() << ")  Xd(dim="
      << job.Xd.dim << ", q=" << job.Xd.p.str() << ")\n";
  out << "seed: " << job.seed << "\n";
  if (job.constants_given) {
    out << "constants: mu=" << fmt_double(job.constants.mu)
        << " lambda1=" << fmt_double(job.constants.lambda1)
        << " lambda2=" << fmt_double(job.constants.lambda2) << "\n";
  }
  out << "\n";
  if (sweep_rows) {
    out << "param        pred_lower   pred_upper   act_lower    act_upper    "
           "verdict\n";
    for (const auto& r : *sweep_rows) {
      char line[160];
      std::snprintf(line, sizeof(line), "%-12.6g %-12.6g %-12.6g %-12.6g %-12.6g %s\n",
                    r.param, r.pred_lower, r.pred_upper, r.act_lower,
                    r.act_upper, r.verdict.c_str());
      out << line;
    }
    return;
  }
  out << result.dump(2) << "\n";
}

}  // namespace

ordered_json execute_analysis(const JobSpec& job) {
  const std::string& analysis = job.analysis;
  require_inputs(job, analysis);
  if (analysis == "equivalence") return run_equivalence(job);
  if (analysis == "mu_threshold") return run_mu_threshold(job);
  if (analysis == "neumann") return run_neumann(job);
  if (analysis == "frame_bounds") return run_frame_bounds(job);
  if (analysis == "sweep") {
    throw input_error("analysis \"sweep\" must be executed through run_job");
  }
  ordered_json notes;
  const TheoremReport rep = run_theorem(job, analysis, &notes);
  ordered_json j = report_to_json(rep);
  for (const auto& [k, v] : notes.items()) j[k] = v;
  return j;
}

void validate_job(const std::filesystem::path& job_path) {
  const JobSpec job = parse_job_file(job_path);
  std::string analysis = job.analysis;
  if (analysis == "sweep") {
    if (!job.sweep) throw input_error("analysis \"sweep\" requires a sweep block");
    analysis = job.sweep->analysis.empty() ? "" : job.sweep->analysis;
    if (analysis.empty()) {
      throw input_error("sweep requires sweep.analysis when analysis=\"sweep\"");
    }
  }
  require_inputs(job, analysis);
}

RunResult run_job(const std::filesystem::path& job_path,
                  const std::filesystem::path& out_dir,
                  const RunOverrides& overrides) {
  JobSpec job = parse_job_file(job_path);
  if (overrides.seed) {
    job.seed = *overrides.seed;
    job.options.optim.seed = *overrides.seed;
  }
  if (overrides.max_delta) job.options.max_delta = *overrides.max_delta;
  if (overrides.tol_residual) job.options.tol_residual = *overrides.tol_residual;
  if (overrides.oracle) {
    if (*overrides.oracle == "auto") {
      job.options.oracle = VerifyOptions::Oracle::automatic;
    } else if (*overrides.oracle == "on") {
      job.options.oracle = VerifyOptions::Oracle::on;
    } else if (*overrides.oracle == "off") {
      job.options.oracle = VerifyOptions::Oracle::off;
    } else {
      throw input_error("--oracle must be auto, on or off");
    }
  }

  std::filesystem::create_directories(out_dir);
  const std::string stem = job_path.stem().string();

  const bool sweeping =
      overrides.force_sweep || job.analysis == "sweep";
  std::string theorem = job.analysis;
  if (sweeping) {
    if (!job.sweep) throw input_error("sweep requires a sweep block in the job");
    if (!job.sweep->analysis.empty()) theorem = job.sweep->analysis;
    if (theorem == "sweep") {
      throw input_error("sweep requires sweep.analysis when analysis=\"sweep\"");
    }
    if (!kTheoremAnalyses.count(theorem)) {
      throw input_error("sweep analysis \"" + theorem +
                        "\" is not a theorem analysis");
    }
    require_inputs(job, theorem);
  }

  ordered_json doc;
  doc["schema_version"] = 1;
  doc["tool"] = "framelab";
  doc["generated_at"] = iso_timestamp();
  doc["seed"] = job.seed;
  doc["analysis"] = sweeping ? theorem : job.analysis;
  ordered_json spaces;
  spaces["X"] = space_to_json(job.X);
  spaces["Xd"] = space_to_json(job.Xd);
  doc["spaces"] = spaces;
  ordered_json tols;
  tols["residual"] = job.options.tol_residual;
  tols["bound_abs"] = job.options.tol_bound_abs;
  tols["bound_rel"] = job.options.tol_bound_rel;
  tols["hyp_eps"] = job.options.eps_hyp;
  doc["tolerances"] = tols;
  if (job.constants_given) doc["constants"] = constants_to_json(job.constants);

  RunResult res;
  res.report_json = out_dir / (stem + ".report.json");
  res.report_text = out_dir / (stem + ".report.txt");

  if (sweeping) {
    ordered_json steps = ordered_json::array();
    const std::vector<SweepRow> rows = run_sweep(job, theorem, &steps);
    ordered_json sweep_doc;
    sweep_doc["parameter"] = job.sweep->parameter;
    sweep_doc["from"] = job.sweep->from;
    sweep_doc["to"] = job.sweep->to;
    sweep_doc["steps"] = job.sweep->steps;
    sweep_doc["rows"] = steps;
    doc["result"] = sweep_doc;

    res.sweep_csv = out_dir / (stem + ".sweep.csv");
    res.sweep_svg = out_dir / (stem + ".sweep.svg");
    write_sweep_csv(*res.sweep_csv, rows);
    write_sweep_svg(*res.sweep_svg, rows, job.sweep->parameter);
    write_text_report(res.report_text, job, doc["result"], &rows);
  } else {
    doc["result"] = execute_analysis(job);
    if (doc["result"].contains("verdict")) {
      res.verdict = doc["result"]["verdict"].get<std::string>();
    }
    write_text_report(res.report_text, job, doc["result"], nullptr);
  }

  std::ofstream out(res.report_json);
  out << doc.dump(2) << "\n";
  return res;
}

}  // namespace framelab
