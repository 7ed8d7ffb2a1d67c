#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "csbo/harness.hpp"
#include "doctest.h"

using namespace csbo;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

harness::ExperimentConfig small_quadratic() {
  harness::ExperimentConfig cfg;
  cfg.problem = "quadratic";
  cfg.basis = "chebyshev";
  cfg.n_basis = 3;
  cfg.quad_dx = 2;
  cfg.quad_dy = 2;
  cfg.n_trials = 2;
  cfg.n_train = 40;
  cfg.n_test = 40;
  cfg.solver.alpha = 0.05;
  cfg.solver.beta = 0.2;
  cfg.solver.t_inner = 5;
  cfg.solver.epochs = 3;
  cfg.solver.batch = 10;
  cfg.solver.seed = 3;
  cfg.solver.timing = false;
  return cfg;
}

}  // namespace

TEST_CASE("config file parsing") {
  const auto p = write_temp("csbo_cfg_parse.cfg",
                            "# comment line\n"
                            "problem = traffic\n"
                            "basis=fourier\n"
                            "n_basis = 7\n"
                            "\n"
                            "solver.alpha = 0.25   # trailing comment\n"
                            "solver.seed = 17\n"
                            "grid.alpha = 0.1, 0.2\n"
                            "grid.t_inner = 5,10\n"
                            "hyperclean.p_corrupt = 0.4\n");
  const auto cfg = harness::ExperimentConfig::from_file(p.string());
  CHECK(cfg.problem == "traffic");
  CHECK(cfg.basis == "fourier");
  CHECK(cfg.n_basis == 7);
  CHECK(cfg.solver.alpha == 0.25);
  CHECK(cfg.solver.seed == 17);
  REQUIRE(cfg.grid_alpha.size() == 2);
  CHECK(cfg.grid_alpha[1] == 0.2);
  REQUIRE(cfg.grid_t_inner.size() == 2);
  CHECK(cfg.grid_t_inner[0] == 5);
  CHECK(cfg.hc_p_corrupt == 0.4);

  const auto bad = write_temp("csbo_cfg_bad.cfg", "no_such_key = 1\n");
  CHECK_THROWS(harness::ExperimentConfig::from_file(bad.string()));

  harness::ExperimentConfig v;
  v.problem = "unknown";
  CHECK_THROWS(v.validate());
  v = harness::ExperimentConfig{};
  v.n_trials = 0;
  CHECK_THROWS(v.validate());
}

TEST_CASE("config echo round-trips through JSON") {
  harness::ExperimentConfig cfg = small_quadratic();
  cfg.grid_alpha = {0.01, 0.1};
  cfg.grid_beta = {0.2};
  cfg.grid_t_inner = {5, 10};
  cfg.ma_window = 4;
  const auto p = write_temp("csbo_cfg_echo.json", cfg.to_json());
  const auto back = harness::ExperimentConfig::from_file(p.string());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.problem == cfg.problem);
  CHECK(back.solver.alpha == cfg.solver.alpha);
  CHECK(back.grid_alpha == cfg.grid_alpha);
  CHECK(back.grid_t_inner == cfg.grid_t_inner);
}

TEST_CASE("run_experiment produces finite metrics and full epoch logs") {
  const auto cfg = small_quadratic();
  const auto report = harness::run_experiment(cfg);
  REQUIRE(int(report.trials.size()) == cfg.n_trials);
  CHECK_FALSE(report.partial);
  for (const auto& t : report.trials) {
    CHECK_FALSE(t.failed);
    CHECK(std::isfinite(t.metrics.test_loss));
    CHECK(std::isfinite(t.metrics.delta_y));
    CHECK(int(t.epochs.size()) == cfg.solver.epochs);
  }
  // per-trial seeds are master + index
  CHECK(report.trials[0].seed == cfg.solver.seed);
  CHECK(report.trials[1].seed == cfg.solver.seed + 1);

  // summary CI bounds recompute from the raw trials
  for (const auto& m : report.summary) {
    if (m.name != "test_loss") continue;
    double mean = 0.0;
    for (const auto& t : report.trials) mean += t.metrics.test_loss;
    mean /= report.trials.size();
    CHECK(m.mean == doctest::Approx(mean).epsilon(1e-12));
    double sd = 0.0;
    for (const auto& t : report.trials)
      sd += (t.metrics.test_loss - mean) * (t.metrics.test_loss - mean);
    sd = std::sqrt(sd / (report.trials.size() - 1));
    const double half = 1.96 * sd / std::sqrt(double(report.trials.size()));
    CHECK(m.ci95_low == doctest::Approx(mean - half).epsilon(1e-12));
    CHECK(m.ci95_high == doctest::Approx(mean + half).epsilon(1e-12));
  }
}

TEST_CASE("parallel trials match sequential trials byte for byte") {
  auto cfg = small_quadratic();
  cfg.n_trials = 3;
  const auto dir_a = fs::temp_directory_path() / "csbo_seq";
  const auto dir_b = fs::temp_directory_path() / "csbo_par";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  cfg.jobs = 1;
  harness::emit_results(harness::run_experiment(cfg), dir_a.string());
  cfg.jobs = 3;
  harness::emit_results(harness::run_experiment(cfg), dir_b.string());

  CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
  CHECK(slurp(dir_a / "epochs.csv") == slurp(dir_b / "epochs.csv"));
}

TEST_CASE("emitted files have the documented shape") {
  const auto cfg = small_quadratic();
  const auto report = harness::run_experiment(cfg);
  const auto dir = fs::temp_directory_path() / "csbo_emit";
  fs::remove_all(dir);
  harness::emit_results(report, dir.string());

  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("problem,basis,n_basis,metric,mean,ci95_low,ci95_high,"
                      "n_trials\n", 0) == 0);

  std::istringstream epochs(slurp(dir / "epochs.csv"));
  std::string line;
  std::getline(epochs, line);
  CHECK(line == "trial,epoch,train_loss,val_loss,grad_norm,wall_time");
  int rows = 0;
  while (std::getline(epochs, line))
    if (!line.empty()) ++rows;
  CHECK(rows == cfg.n_trials * cfg.solver.epochs);

  // echo parses back to the same configuration
  const auto echoed =
      harness::ExperimentConfig::from_file((dir / "config_echo.json").string());
  CHECK(echoed.to_json() == report.config.to_json());

  // identical rerun gives identical bytes (timing disabled)
  const auto dir2 = fs::temp_directory_path() / "csbo_emit2";
  fs::remove_all(dir2);
  harness::emit_results(harness::run_experiment(cfg), dir2.string());
  CHECK(slurp(dir / "summary.csv") == slurp(dir2 / "summary.csv"));
  CHECK(slurp(dir / "epochs.csv") == slurp(dir2 / "epochs.csv"));
}

TEST_CASE("grid search picks the best cell and reports divergences") {
  auto cfg = small_quadratic();
  cfg.n_trials = 1;
  cfg.grid_trials = 1;
  cfg.grid_alpha = {0.05};
  cfg.grid_beta = {0.2, 1e7};  // the second cell diverges
  cfg.grid_t_inner = {5};

  const auto report = harness::run_grid_search(cfg);
  REQUIRE(report.cells.size() == 2);
  CHECK(report.best.beta == 0.2);
  int diverged = 0;
  for (const auto& c : report.cells) {
    if (c.diverged) {
      ++diverged;
      CHECK(c.beta == 1e7);
      CHECK(std::isnan(c.criterion));
    } else {
      CHECK(std::isfinite(c.criterion));
    }
  }
  CHECK(diverged == 1);

  const auto dir = fs::temp_directory_path() / "csbo_grid";
  fs::remove_all(dir);
  harness::emit_grid_results(report, dir.string());
  std::istringstream grid(slurp(dir / "grid.csv"));
  std::string line;
  int rows = -1;  // header
  while (std::getline(grid, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);

  // every cell diverging is an error
  cfg.grid_beta = {1e7};
  CHECK_THROWS(harness::run_grid_search(cfg));

  // singleton grid returns that cell
  cfg.grid_alpha = {0.05};
  cfg.grid_beta = {0.2};
  cfg.grid_t_inner = {5};
  const auto single = harness::run_grid_search(cfg);
  CHECK(single.cells.size() == 1);
  CHECK(single.best.alpha == 0.05);
  CHECK(single.best.beta == 0.2);
  CHECK(single.best.t_inner == 5);
}

TEST_CASE("verify checks pass on a fresh seed") {
  CHECK(harness::run_verify(1234) == 0);
}
