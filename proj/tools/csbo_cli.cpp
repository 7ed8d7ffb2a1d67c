#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "csbo/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Contextual stochastic bilevel optimization benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::int64_t seed_override = -1;
  int jobs_override = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "config file (key=value or JSON echo)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed_override, "override master seed");
    cmd->add_option("--out", out_override, "override output directory");
    cmd->add_option("--jobs", jobs_override, "override worker count");
  };

  auto* run_cmd = app.add_subcommand("run", "run the configured experiment");
  add_common(run_cmd);
  auto* grid_cmd = app.add_subcommand("grid", "grid-search solver parameters");
  add_common(grid_cmd);

  auto* verify_cmd = app.add_subcommand("verify", "run quick oracle checks");
  std::uint64_t verify_seed = 0;
  verify_cmd->add_option("--seed", verify_seed, "seed for the checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify_cmd->parsed()) {
      const int failures = csbo::harness::run_verify(verify_seed);
      std::printf("[verify] %s\n", failures ? "FAILED" : "all checks passed");
      return failures ? 1 : 0;
    }

    auto cfg = csbo::harness::ExperimentConfig::from_file(config_path);
    if (seed_override >= 0)
      cfg.solver.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_path = out_override;
    if (jobs_override > 0) cfg.jobs = jobs_override;

    if (run_cmd->parsed()) {
      const auto report = csbo::harness::run_experiment(cfg);
      csbo::harness::emit_results(report, cfg.output_path);
      for (const auto& s : report.summary)
        std::printf("%-16s mean %.6g  ci95 [%.6g, %.6g]  n=%d\n", s.name.c_str(),
                    s.mean, s.ci95_low, s.ci95_high, s.n);
      if (report.partial) {
        std::fprintf(stderr, "warning: some trials failed; report is partial\n");
        for (const auto& t : report.trials)
          if (t.failed)
            std::fprintf(stderr, "  trial %d: %s\n", t.trial, t.failure.c_str());
      }
      std::printf("results written to %s\n", cfg.output_path.c_str());
    } else {
      const auto report = csbo::harness::run_grid_search(cfg);
      csbo::harness::emit_grid_results(report, cfg.output_path);
      std::printf("best: alpha=%g beta=%g t_inner=%d\n", report.best.alpha,
                  report.best.beta, report.best.t_inner);
      std::printf("grid written to %s\n", cfg.output_path.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
