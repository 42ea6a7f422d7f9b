#include "framelab/job.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace framelab;
using nlohmann::json;

namespace {

std::filesystem::path make_temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("framelab_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_file(const std::filesystem::path& dir,
                                 const std::string& name,
                                 const std::string& text) {
  const auto p = dir / name;
  std::ofstream out(p);
  out << text;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kFrameJob = R"({
  "seed": 7,
  "analysis": "frame_3_3",
  "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
  "matrices": {
    "G": [[1, 0], [0, 1]],
    "Phi": [[1, 0], [0, 1]]
  },
  "constants": {"mu": 0, "lambda1": 0, "lambda2": 0}
})";

}  // namespace

TEST_CASE("run_job: identical frames verify with Delta = 0") {
  const auto dir = make_temp_dir("run_basic");
  const auto job = write_file(dir, "job.json", kFrameJob);
  const RunResult res = run_job(job, dir / "out");
  CHECK(res.verdict == "verified");

  const json doc = json::parse(slurp(res.report_json));
  CHECK(doc.at("schema_version") == 1);
  CHECK(doc.at("result").at("verdict") == "verified");
  CHECK(doc.at("result").at("delta").get<double>() == doctest::Approx(0.0));
  CHECK(doc.at("tolerances").contains("residual"));
  CHECK(std::filesystem::exists(res.report_text));
}

TEST_CASE("job validation names the offending field") {
  CHECK_THROWS_WITH_AS(parse_job_text(R"({"analysis": "frame_3_3"})"),
                       doctest::Contains("spaces"), input_error);

  CHECK_THROWS_WITH_AS(
      parse_job_text(R"({
        "analysis": "frame_3_3",
        "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
        "matrices": {"G": [[1, 0], [0]]}
      })"),
      doctest::Contains("row 1"), input_error);

  CHECK_THROWS_WITH_AS(parse_job_text(R"({"analysis": "nope",
        "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}}})"),
                       doctest::Contains("unknown analysis"), input_error);

  CHECK_THROWS_WITH_AS(parse_job_text(R"({"analysis": "frame_3_3", "bogus": 1,
        "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}}})"),
                       doctest::Contains("bogus"), input_error);

  CHECK_THROWS_WITH_AS(
      parse_job_text(R"({"analysis": "frame_3_3",
        "spaces": {"X": {"dim": 2, "p": 0.5}, "Xd": {"dim": 2, "q": 2}}})"),
      doctest::Contains("spaces.X"), input_error);

  // exponent "inf" round-trips
  const JobSpec job = parse_job_text(R"({
    "analysis": "frame_bounds",
    "spaces": {"X": {"dim": 2, "p": "inf"}, "Xd": {"dim": 2, "q": 1}},
    "matrices": {"G": [[1, 0], [0, 1]]}
  })");
  CHECK(job.X.p.is_infinity());
  CHECK(job.Xd.p.value() == doctest::Approx(1.0));
}

TEST_CASE("tolerance overrides reach the report") {
  const auto dir = make_temp_dir("tols");
  const auto job = write_file(dir, "job.json", kFrameJob);
  RunOverrides o;
  o.tol_residual = 1e-5;
  const RunResult res = run_job(job, dir / "out", o);
  const json doc = json::parse(slurp(res.report_json));
  CHECK(doc.at("tolerances").at("residual").get<double>() ==
        doctest::Approx(1e-5));
}

TEST_CASE("analysis sweep without a sweep block is rejected") {
  const auto dir = make_temp_dir("sweepless");
  const auto job = write_file(dir, "job.json", R"({
    "analysis": "sweep",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {"G": [[1, 0], [0, 1]], "Phi": [[1, 0], [0, 1]]},
    "constants": {"mu": 0}
  })");
  CHECK_THROWS_WITH_AS(validate_job(job), doctest::Contains("sweep"),
                       input_error);
  CHECK_THROWS_AS(run_job(job, dir / "out"), input_error);
}

TEST_CASE("missing matrices are reported per analysis") {
  const auto dir = make_temp_dir("missing");
  const auto job = write_file(dir, "job.json", R"({
    "analysis": "riesz_3_8",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "constants": {"mu": 0}
  })");
  CHECK_THROWS_WITH_AS(validate_job(job), doctest::Contains("matrices.F"),
                       input_error);
}

TEST_CASE("reports are byte-identical across reruns (timestamp aside)") {
  const auto dir = make_temp_dir("determinism");
  const auto job = write_file(dir, "job.json", R"({
    "seed": 99,
    "analysis": "frame_3_3",
    "spaces": {"X": {"dim": 2, "p": 1.5}, "Xd": {"dim": 3, "q": 3}},
    "matrices": {
      "G": [[1.0, 0.1], [0.2, 1.1], [0.4, -0.3]],
      "Phi": [[1.02, 0.11], [0.19, 1.08], [0.41, -0.33]]
    },
    "constants": {"mu": 0.2, "lambda1": 0.01, "lambda2": 0.02}
  })");

  const RunResult r1 = run_job(job, dir / "out1");
  const RunResult r2 = run_job(job, dir / "out2");
  json d1 = json::parse(slurp(r1.report_json));
  json d2 = json::parse(slurp(r2.report_json));
  d1.erase("generated_at");
  d2.erase("generated_at");
  CHECK(d1.dump() == d2.dump());
}

TEST_CASE("seed override changes the effective seed") {
  const auto dir = make_temp_dir("seed");
  const auto job = write_file(dir, "job.json", kFrameJob);
  RunOverrides o;
  o.seed = 123;
  const RunResult res = run_job(job, dir / "out", o);
  const json doc = json::parse(slurp(res.report_json));
  CHECK(doc.at("seed") == 123);
}

TEST_CASE("sweep writes CSV rows and an SVG plot") {
  const auto dir = make_temp_dir("sweep");
  const auto job = write_file(dir, "job.json", R"({
    "seed": 5,
    "analysis": "frame_3_3",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {
      "G": [[1, 0], [0, 1]],
      "Phi": [[1.05, 0.02], [-0.01, 0.97]]
    },
    "constants": {"mu": 0.2, "lambda1": 0, "lambda2": 0},
    "sweep": {"parameter": "mu", "from": 0.1, "to": 0.5, "steps": 5}
  })");

  RunOverrides o;
  o.force_sweep = true;
  const RunResult res = run_job(job, dir / "out", o);
  REQUIRE(res.sweep_csv.has_value());
  REQUIRE(res.sweep_svg.has_value());

  const std::string csv = slurp(*res.sweep_csv);
  CHECK(csv.rfind("param,pred_lower,pred_upper,act_lower,act_upper,verdict\n", 0) ==
        0);
  int lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 6);  // header + 5 steps
  // mu >= ||Phi - G|| certifies every step here: all verdicts verified
  CHECK(csv.find("hypothesis_fails") == std::string::npos);

  const std::string svg = slurp(*res.sweep_svg);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("pred_lower") != std::string::npos);

  const json doc = json::parse(slurp(res.report_json));
  CHECK(doc.at("result").at("rows").size() == 5);
}

TEST_CASE("scale sweep interpolates the perturbed family") {
  const auto dir = make_temp_dir("scale_sweep");
  const auto job = write_file(dir, "job.json", R"({
    "analysis": "sweep",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {
      "G": [[1, 0], [0, 1]],
      "Phi": [[1.3, 0.1], [0.05, 0.8]]
    },
    "constants": {"mu": 0.45, "lambda1": 0, "lambda2": 0},
    "sweep": {"parameter": "scale", "from": 0, "to": 1, "steps": 3,
              "analysis": "frame_3_3"}
  })");
  const RunResult res = run_job(job, dir / "out");
  REQUIRE(res.sweep_csv.has_value());
  const std::string csv = slurp(*res.sweep_csv);
  // at scale 0 the systems coincide; the final row uses the full Phi
  CHECK(csv.find("\n0,") != std::string::npos);
  CHECK(csv.find("\n1,") != std::string::npos);
}

TEST_CASE("equivalence, neumann and mu_threshold analyses run end to end") {
  const auto dir = make_temp_dir("other_analyses");

  const auto eq = write_file(dir, "eq.json", R"({
    "analysis": "equivalence",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {"F": [[1, 0], [0, 1]], "Psi": [[1.01, 0], [0, 0.99]]},
    "constants": {"mu": 0.05, "lambda1": 0.05, "lambda2": 0.05},
    "equivalence": {"from": "A1", "to": "A11"}
  })");
  const RunResult r1 = run_job(eq, dir / "out");
  CHECK(r1.verdict == "verified");

  const auto nm = write_file(dir, "neumann.json", R"({
    "analysis": "neumann",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {"G": [[0.9, 0.05], [0.0, 1.1]]}
  })");
  const RunResult r2 = run_job(nm, dir / "out");
  const json doc = json::parse(slurp(r2.report_json));
  CHECK(doc.at("result").at("certified") == true);

  const auto mt = write_file(dir, "mu.json", R"({
    "analysis": "mu_threshold",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {"F": [[1, 0], [0, 1]], "Psi": [[0.9, 0], [0, 0.9]]}
  })");
  const RunResult r3 = run_job(mt, dir / "out");
  const json doc3 = json::parse(slurp(r3.report_json));
  CHECK(doc3.at("result").at("applicable") == true);
}

TEST_CASE("banach, operator and hilbert analyses dispatch through jobs") {
  const auto dir = make_temp_dir("dispatch");

  // banach_frame_3_6 without S: the pseudo-inverse default is recorded
  const auto banach = write_file(dir, "banach.json", R"({
    "analysis": "banach_frame_3_6",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 3, "q": 2}},
    "matrices": {
      "G":   [[1, 0], [0, 1], [0.5, 0.5]],
      "Phi": [[1.01, 0.0], [0.0, 0.99], [0.5, 0.51]]
    },
    "constants": {"mu": 0.05, "lambda1": 0, "lambda2": 0}
  })");
  const RunResult r1 = run_job(banach, dir / "out");
  const json d1 = json::parse(slurp(r1.report_json));
  CHECK(d1.at("result").at("verdict") == "verified");
  CHECK(d1.at("result").at("S_default") == "pseudo_inverse");

  // operator_pert_cc accepts the (nu, beta1, beta2) aliases
  const auto cc = write_file(dir, "cc.json", R"({
    "analysis": "operator_pert_cc",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {
      "G": [[1, 0], [0, 1]],
      "S": [[1, 0], [0, 1]],
      "S_tilde": [[1.05, 0.0], [0.0, 1.05]]
    },
    "constants": {"nu": 0.0, "beta1": 0.05, "beta2": 0}
  })");
  const RunResult r2 = run_job(cc, dir / "out");
  const json d2 = json::parse(slurp(r2.report_json));
  CHECK(d2.at("result").at("verdict") == "verified");
  CHECK(d2.at("constants").at("lambda1").get<double>() == doctest::Approx(0.05));

  // atomic_3_10 (truncated mode) with a canonical dual pair
  const auto atomic = write_file(dir, "atomic.json", R"({
    "analysis": "atomic_3_10",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {
      "G":   [[1, 0], [0, 1]],
      "F":   [[1, 0], [0, 1]],
      "Psi": [[0.95, 0.0], [0.0, 0.95]]
    },
    "constants": {"mu": 0.0, "lambda1": 0.06, "lambda2": 0}
  })");
  const RunResult r3 = run_job(atomic, dir / "out");
  const json d3 = json::parse(slurp(r3.report_json));
  CHECK(d3.at("result").at("verdict") == "verified");
  CHECK(d3.at("result").at("theorem_id") == "atomic_3_10");

  // hilbert_1_1 in formula-only mode
  const auto hf = write_file(dir, "hf.json", R"({
    "analysis": "hilbert_1_1",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "hilbert": {"A": 1.0, "B": 4.0},
    "constants": {"mu": 0.1, "lambda1": 0, "lambda2": 0}
  })");
  const RunResult r4 = run_job(hf, dir / "out");
  const json d4 = json::parse(slurp(r4.report_json));
  CHECK(d4.at("result").at("mode") == "formula_only");
  CHECK(d4.at("result").at("predicted_lower").get<double>() ==
        doctest::Approx(0.81));
}

#ifdef FRAMELAB_CLI_PATH
TEST_CASE("CLI exit codes: 0 on success, 2 on input errors") {
  const auto dir = make_temp_dir("cli");
  const auto good = write_file(dir, "good.json", kFrameJob);
  const auto bad = write_file(dir, "bad.json", R"({
    "analysis": "frame_3_3",
    "spaces": {"X": {"dim": 2, "p": 2}, "Xd": {"dim": 2, "q": 2}},
    "matrices": {"G": [[1, 0], [0, 1, 3]], "Phi": [[1, 0], [0, 1]]},
    "constants": {"mu": 0}
  })");

  const std::string cli = FRAMELAB_CLI_PATH;
  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run("validate " + good.string()) == 0);
  CHECK(run("validate " + bad.string()) == 2);
  CHECK(run("run " + good.string() + " --out " + (dir / "out").string()) == 0);
  CHECK(run("run " + bad.string() + " --out " + (dir / "out").string()) == 2);
  CHECK(run("run " + (dir / "absent.json").string()) == 2);

  // FRAMELAB_SEED overrides the job seed
  const std::string cmd = "FRAMELAB_SEED=777 " + cli + " run " + good.string() +
                          " --out " + (dir / "seeded").string() +
                          " > /dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const json doc =
      json::parse(slurp(dir / "seeded" / "good.report.json"));
  CHECK(doc.at("seed") == 777);
}
#endif
