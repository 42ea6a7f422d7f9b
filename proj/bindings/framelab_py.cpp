#include "framelab/equivalence.hpp"
#include "framelab/job.hpp"
#include "framelab/oracles.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>

namespace py = pybind11;
using namespace framelab;

namespace {

Exponent to_exponent(double p) {
  if (std::isinf(p)) return Exponent::infinity();
  return Exponent::finite(p);
}

double from_exponent(const Exponent& e) {
  return e.is_infinity() ? std::numeric_limits<double>::infinity() : e.value();
}

VerifyOptions make_options(const std::string& oracle, double tol_residual,
                           std::optional<double> max_delta,
                           std::uint64_t seed) {
  VerifyOptions o;
  if (oracle == "on") {
    o.oracle = VerifyOptions::Oracle::on;
  } else if (oracle == "off") {
    o.oracle = VerifyOptions::Oracle::off;
  } else if (oracle == "auto") {
    o.oracle = VerifyOptions::Oracle::automatic;
  } else {
    throw input_error("oracle must be auto, on or off");
  }
  o.tol_residual = tol_residual;
  o.max_delta = max_delta;
  o.optim.seed = seed;
  return o;
}

constexpr char kOptionDoc[] =
    "oracle: brute-force refinement policy (auto/on/off); seed drives the "
    "deterministic multistart optimizer";

}  // namespace

PYBIND11_MODULE(_framelab, m) {
  m.doc() =
      "Perturbation laboratory for frames, Banach frames, atomic "
      "decompositions and Riesz bases in finite-dimensional l^p spaces.";

  py::register_exception<input_error>(m, "InputError", PyExc_ValueError);
  py::register_exception<numerical_error>(m, "NumericalError",
                                          PyExc_RuntimeError);

  py::class_<SpaceSpec>(m, "SpaceSpec")
      .def(py::init([](int dim, double p) {
             return SpaceSpec(dim, to_exponent(p));
           }),
           py::arg("dim"), py::arg("p"),
           "Finite-dimensional l^p space; use math.inf for p = infinity.")
      .def_readonly("dim", &SpaceSpec::dim)
      .def_property_readonly(
          "p", [](const SpaceSpec& s) { return from_exponent(s.p); })
      .def_property_readonly("is_reflexive_cb", &SpaceSpec::is_reflexive_cb)
      .def("__repr__", [](const SpaceSpec& s) {
        return "SpaceSpec(dim=" + std::to_string(s.dim) + ", p=" + s.p.str() +
               ")";
      });

  py::class_<FrameSystem>(m, "FrameSystem")
      .def(py::init<Mat, SpaceSpec, SpaceSpec>(), py::arg("matrix"),
           py::arg("space_X"), py::arg("space_Xd"),
           "Row i of `matrix` is the functional g_i (or vector f_i).")
      .def_readonly("matrix", &FrameSystem::matrix)
      .def_readonly("space_X", &FrameSystem::space_X)
      .def_readonly("space_Xd", &FrameSystem::space_Xd);

  py::class_<BoundsEstimate>(m, "BoundsEstimate")
      .def_readonly("value", &BoundsEstimate::value)
      .def_property_readonly("kind",
                             [](const BoundsEstimate& b) {
                               return b.kind == BoundKind::upper_B ? "upper_B"
                                                                   : "lower_A";
                             })
      .def_readonly("certified_low", &BoundsEstimate::certified_low)
      .def_readonly("certified_high", &BoundsEstimate::certified_high)
      .def_readonly("evaluations", &BoundsEstimate::evaluations)
      .def_readonly("method", &BoundsEstimate::method)
      .def("__repr__", [](const BoundsEstimate& b) {
        return "BoundsEstimate(value=" + std::to_string(b.value) + ", bracket=[" +
               std::to_string(b.certified_low) + ", " +
               std::to_string(b.certified_high) + "], method=" + b.method + ")";
      });

  py::class_<InvertibilityCertificate>(m, "InvertibilityCertificate")
      .def_readonly("lambda1", &InvertibilityCertificate::lambda1)
      .def_readonly("lambda2", &InvertibilityCertificate::lambda2)
      .def_readonly("inverse_lower", &InvertibilityCertificate::inverse_lower)
      .def_readonly("inverse_upper", &InvertibilityCertificate::inverse_upper);

  py::class_<PerturbationConstants>(m, "PerturbationConstants")
      .def(py::init<double, double, double>(), py::arg("mu") = 0.0,
           py::arg("lambda1") = 0.0, py::arg("lambda2") = 0.0)
      .def_readonly("mu", &PerturbationConstants::mu)
      .def_readonly("lambda1", &PerturbationConstants::lambda1)
      .def_readonly("lambda2", &PerturbationConstants::lambda2)
      .def("__repr__", [](const PerturbationConstants& k) {
        return "PerturbationConstants(mu=" + std::to_string(k.mu) +
               ", lambda1=" + std::to_string(k.lambda1) +
               ", lambda2=" + std::to_string(k.lambda2) + ")";
      });

  py::class_<MarginCheck>(m, "MarginCheck")
      .def_readonly("name", &MarginCheck::name)
      .def_readonly("margin", &MarginCheck::margin)
      .def_readonly("tolerance", &MarginCheck::tolerance)
      .def_readonly("satisfied", &MarginCheck::satisfied)
      .def_readonly("boundary", &MarginCheck::boundary);

  py::class_<TheoremReport>(m, "TheoremReport")
      .def_property_readonly(
          "theorem_id",
          [](const TheoremReport& r) { return to_string(r.theorem_id); })
      .def_property_readonly(
          "verdict", [](const TheoremReport& r) { return to_string(r.verdict); })
      .def_readonly("hypothesis_holds", &TheoremReport::hypothesis_holds)
      .def_readonly("margins", &TheoremReport::margins)
      .def_readonly("delta", &TheoremReport::delta)
      .def_readonly("predicted_lower", &TheoremReport::predicted_lower)
      .def_readonly("predicted_upper", &TheoremReport::predicted_upper)
      .def_readonly("actual_lower", &TheoremReport::actual_lower)
      .def_readonly("actual_upper", &TheoremReport::actual_upper)
      .def_readonly("constants", &TheoremReport::constants)
      .def_readonly("residual", &TheoremReport::residual)
      .def_readonly("extras", &TheoremReport::extras)
      .def("__repr__", [](const TheoremReport& r) {
        return "TheoremReport(" + to_string(r.theorem_id) + ", " +
               to_string(r.verdict) + ")";
      });

  py::class_<BruteResult>(m, "BruteResult")
      .def_readonly("value", &BruteResult::value)
      .def_readonly("gap", &BruteResult::gap)
      .def_readonly("evaluations", &BruteResult::evaluations);

  py::class_<EquivalenceReport>(m, "EquivalenceReport")
      .def_property_readonly(
          "cond_a", [](const EquivalenceReport& r) { return to_string(r.cond_a); })
      .def_property_readonly(
          "cond_b", [](const EquivalenceReport& r) { return to_string(r.cond_b); })
      .def_readonly("k_a", &EquivalenceReport::k_a)
      .def_readonly("k_b", &EquivalenceReport::k_b)
      .def_readonly("residual_a", &EquivalenceReport::residual_a)
      .def_readonly("residual_b", &EquivalenceReport::residual_b)
      .def_readonly("bound_B", &EquivalenceReport::bound_B)
      .def_readonly("cond_a_certified", &EquivalenceReport::cond_a_certified)
      .def_readonly("cond_b_certified", &EquivalenceReport::cond_b_certified)
      .def_readonly("ok", &EquivalenceReport::ok);

  // spaces
  m.def(
      "norm",
      [](const Vec& v, double p) { return norm(v, to_exponent(p)); },
      py::arg("v"), py::arg("p"), "l^p norm (p = math.inf for the max norm).");
  m.def(
      "dual_exponent",
      [](double p) { return from_exponent(to_exponent(p).dual()); },
      py::arg("p"));
  m.def(
      "sample_unit_sphere",
      [](const SpaceSpec& s, int count, std::uint64_t seed) {
        return sample_unit_sphere(s, count, seed);
      },
      py::arg("space"), py::arg("count"), py::arg("seed") = 0);

  // operators
  m.def(
      "op_norm",
      [](const Mat& M, const SpaceSpec& from, const SpaceSpec& to) {
        return op_norm(M, from, to);
      },
      py::arg("M"), py::arg("from_space"), py::arg("to_space"));
  m.def(
      "lower_bound",
      [](const Mat& M, const SpaceSpec& from, const SpaceSpec& to) {
        return lower_bound(M, from, to);
      },
      py::arg("M"), py::arg("from_space"), py::arg("to_space"));
  m.def("bessel_bound",
        [](const FrameSystem& F) { return bessel_bound(F); });
  m.def("frame_bounds",
        [](const FrameSystem& F) { return frame_bounds(F); });
  m.def("riesz_bounds",
        [](const FrameSystem& F) { return riesz_bounds(F); });
  m.def(
      "check_neumann_invertibility",
      [](const Mat& G, const SpaceSpec& s) {
        return check_neumann_invertibility(G, s);
      },
      py::arg("G"), py::arg("space"));
  m.def("pseudo_inverse", &pseudo_inverse, py::arg("M"));

  // oracles
  m.def("brute_op_norm", &brute_op_norm, py::arg("M"), py::arg("from_space"),
        py::arg("to_space"), py::arg("resolution") = 720);
  m.def("brute_lower_bound", &brute_lower_bound, py::arg("M"),
        py::arg("from_space"), py::arg("to_space"), py::arg("resolution") = 720);
  m.def("brute_residual", &brute_residual, py::arg("G"), py::arg("Phi"),
        py::arg("k"), py::arg("resolution") = 720);

  // perturbation
  m.def("delta", &delta, py::arg("B"), py::arg("k"));
  m.def("hilbert_bounds_1_1", &hilbert_bounds_1_1, py::arg("A"), py::arg("B"),
        py::arg("k"));
  m.def("banach_frame_lower_bound", &banach_frame_lower_bound,
        py::arg("S_norm"), py::arg("k"));

#define FRAMELAB_OPTS_ARGS                                              \
  py::arg("oracle") = "auto", py::arg("tol_residual") = 1e-8,           \
  py::arg("max_delta") = std::nullopt, py::arg("seed") = 0x5eedf00dULL

  m.def(
      "worst_case_residual",
      [](const FrameSystem& G, const FrameSystem& Phi,
         const PerturbationConstants& k, const std::string& oracle,
         double tol_residual, std::optional<double> max_delta,
         std::uint64_t seed) {
        return worst_case_residual(G, Phi, k,
                                   make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("Phi"), py::arg("k"), FRAMELAB_OPTS_ARGS, kOptionDoc);
  m.def(
      "minimal_mu",
      [](const FrameSystem& G, const FrameSystem& Phi, double lambda1,
         double lambda2, const std::string& oracle, double tol_residual,
         std::optional<double> max_delta, std::uint64_t seed) {
        return minimal_mu(G, Phi, lambda1, lambda2,
                          make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("Phi"), py::arg("lambda1") = 0.0,
      py::arg("lambda2") = 0.0, FRAMELAB_OPTS_ARGS);

#define FRAMELAB_VERIFY_PAIR(pyname, fn)                                       \
  m.def(                                                                       \
      pyname,                                                                  \
      [](const FrameSystem& a, const FrameSystem& b,                           \
         const PerturbationConstants& k, const std::string& oracle,            \
         double tol_residual, std::optional<double> max_delta,                 \
         std::uint64_t seed) {                                                 \
        return fn(a, b, k, make_options(oracle, tol_residual, max_delta, seed)); \
      },                                                                       \
      py::arg("base"), py::arg("perturbed"), py::arg("k"), FRAMELAB_OPTS_ARGS, \
      kOptionDoc)

  FRAMELAB_VERIFY_PAIR("verify_bessel_perturbation", verify_bessel_perturbation);
  FRAMELAB_VERIFY_PAIR("verify_frame_perturbation", verify_frame_perturbation);
  FRAMELAB_VERIFY_PAIR("verify_riesz_perturbation", verify_riesz_perturbation);
  FRAMELAB_VERIFY_PAIR("verify_hilbert_frame_perturbation",
                       verify_hilbert_frame_perturbation);
#undef FRAMELAB_VERIFY_PAIR

  m.def(
      "verify_banach_frame_perturbation",
      [](const FrameSystem& G, const FrameSystem& Phi, const Mat& S,
         const PerturbationConstants& k, const std::string& oracle,
         double tol_residual, std::optional<double> max_delta,
         std::uint64_t seed) {
        return verify_banach_frame_perturbation(
            G, Phi, S, k, make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("Phi"), py::arg("S"), py::arg("k"),
      FRAMELAB_OPTS_ARGS);
  m.def(
      "verify_banach_frame_projection",
      [](const FrameSystem& G, const FrameSystem& Phi, const Mat& P,
         const PerturbationConstants& k, const std::string& oracle,
         double tol_residual, std::optional<double> max_delta,
         std::uint64_t seed) {
        return verify_banach_frame_projection(
            G, Phi, P, k, make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("Phi"), py::arg("P"), py::arg("k"),
      FRAMELAB_OPTS_ARGS);
  m.def(
      "verify_atomic_decomposition_perturbation",
      [](const FrameSystem& G, const FrameSystem& F, const FrameSystem& Psi,
         const PerturbationConstants& k, const std::string& mode,
         const std::string& oracle, double tol_residual,
         std::optional<double> max_delta, std::uint64_t seed) {
        const AtomicMode am = mode == "truncated_A10" ? AtomicMode::truncated_A10
                                                      : AtomicMode::full_A9;
        return verify_atomic_decomposition_perturbation(
            G, F, Psi, k, am, make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("F"), py::arg("Psi"), py::arg("k"),
      py::arg("mode") = "full_A9", FRAMELAB_OPTS_ARGS);
  m.def(
      "verify_operator_perturbation_cc",
      [](const FrameSystem& G, const Mat& S, const Mat& S_tilde,
         const PerturbationConstants& k, const std::string& oracle,
         double tol_residual, std::optional<double> max_delta,
         std::uint64_t seed) {
        return verify_operator_perturbation_cc(
            G, S, S_tilde, k, make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("G"), py::arg("S"), py::arg("S_tilde"), py::arg("k"),
      FRAMELAB_OPTS_ARGS);

  // equivalence
  m.def(
      "translate_constants",
      [](const std::string& from, const std::string& to,
         const PerturbationConstants& k, double B) {
        return translate_constants(parse_condition_id(from),
                                   parse_condition_id(to), k, B);
      },
      py::arg("cond_from"), py::arg("cond_to"), py::arg("k"), py::arg("B"));
  m.def(
      "check_equivalence",
      [](const FrameSystem& base, const FrameSystem& pert,
         const std::string& cond_a, const PerturbationConstants& k_a,
         const std::string& cond_b, std::optional<Mat> S,
         std::optional<FrameSystem> coefficients, const std::string& oracle,
         double tol_residual, std::optional<double> max_delta,
         std::uint64_t seed) {
        EquivalenceInstance inst{base, pert, std::move(S),
                                 std::move(coefficients)};
        return check_equivalence(inst, parse_condition_id(cond_a), k_a,
                                 parse_condition_id(cond_b),
                                 make_options(oracle, tol_residual, max_delta, seed));
      },
      py::arg("base"), py::arg("perturbed"), py::arg("cond_a"), py::arg("k_a"),
      py::arg("cond_b"), py::arg("S") = std::nullopt,
      py::arg("coefficients") = std::nullopt, FRAMELAB_OPTS_ARGS);
#undef FRAMELAB_OPTS_ARGS

  // jobs
  m.def(
      "run_job",
      [](const std::filesystem::path& job, const std::filesystem::path& out) {
        const RunResult r = run_job(job, out);
        py::dict d;
        d["report_json"] = r.report_json.string();
        d["report_text"] = r.report_text.string();
        if (r.sweep_csv) d["sweep_csv"] = r.sweep_csv->string();
        if (r.sweep_svg) d["sweep_svg"] = r.sweep_svg->string();
        d["verdict"] = r.verdict;
        return d;
      },
      py::arg("job_path"), py::arg("out_dir"),
      "Execute a job file and write report artifacts; returns their paths.");
  m.def("validate_job", &validate_job, py::arg("job_path"));
}
