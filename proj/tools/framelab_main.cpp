#include "framelab/job.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct CommonOpts {
  std::string job_path;
  std::string out_dir = ".";
  framelab::RunOverrides overrides;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("job", c.job_path, "job JSON file")->required();
  cmd->add_option("--out", c.out_dir, "output directory for reports");
  double max_delta = 0.0, tol_residual = 0.0;
  auto* md = cmd->add_option("--max-delta", max_delta,
                             "fail the hypothesis when Delta exceeds this cap");
  auto* tr = cmd->add_option("--tol-residual", tol_residual,
                             "residual certification tolerance");
  std::string oracle;
  auto* orc = cmd->add_option("--oracle", oracle,
                              "brute-force oracle policy: auto, on or off")
                  ->check(CLI::IsMember({"auto", "on", "off"}));
  cmd->callback([&c, md, tr, orc, &max_delta, &tol_residual, &oracle]() {
    if (md->count()) c.overrides.max_delta = max_delta;
    if (tr->count()) c.overrides.tol_residual = tol_residual;
    if (orc->count()) c.overrides.oracle = oracle;
  });
}

void apply_env_seed(framelab::RunOverrides& overrides) {
  if (const char* env = std::getenv("FRAMELAB_SEED")) {
    try {
      overrides.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw framelab::input_error("FRAMELAB_SEED is not an integer: " +
                                  std::string(env));
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framelab: perturbation laboratory for frames in l^p spaces"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "execute a job and write reports");
  add_common(run, run_opts);

  CommonOpts sweep_opts;
  CLI::App* sweep =
      app.add_subcommand("sweep", "execute the job's parameter sweep");
  add_common(sweep, sweep_opts);

  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate", "parse and validate a job file");
  validate->add_option("job", validate_path, "job JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (run->parsed()) {
      apply_env_seed(run_opts.overrides);
      const auto res =
          framelab::run_job(run_opts.job_path, run_opts.out_dir, run_opts.overrides);
      std::cout << "report: " << res.report_json.string() << "\n";
      if (!res.verdict.empty()) std::cout << "verdict: " << res.verdict << "\n";
      if (res.sweep_csv) std::cout << "sweep: " << res.sweep_csv->string() << "\n";
      return kExitOk;
    }
    if (sweep->parsed()) {
      apply_env_seed(sweep_opts.overrides);
      sweep_opts.overrides.force_sweep = true;
      const auto res = framelab::run_job(sweep_opts.job_path, sweep_opts.out_dir,
                                         sweep_opts.overrides);
      std::cout << "report: " << res.report_json.string() << "\n";
      if (res.sweep_csv) std::cout << "sweep: " << res.sweep_csv->string() << "\n";
      return kExitOk;
    }
    if (validate->parsed()) {
      framelab::validate_job(validate_path);
      std::cout << "ok\n";
      return kExitOk;
    }
  } catch (const framelab::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const framelab::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
