#pragma once

#include <memory>
#include <string>
#include <vector>

#include "csbo/solver.hpp"

namespace csbo::harness {

/// Resolved experiment configuration. On disk this is a flat key=value file
/// (one key per line, nested keys dot-separated, '#' comments); the emitted
/// config echo is JSON with the same keys and parses back identically.
struct ExperimentConfig {
  std::string problem = "quadratic";  // quadratic | traffic | hyperclean
  std::string basis = "chebyshev";    // chebyshev | fourier | monomial | indicator
  int n_basis = 5;

  solver::SolverConfig solver;

  int n_trials = 1;
  int n_train = 200;
  int n_test = 200;

  std::vector<double> grid_alpha;
  std::vector<double> grid_beta;
  std::vector<int> grid_t_inner;
  int grid_trials = 1;  // trials per grid cell

  std::string output_path = "out";
  std::string data_path;  // optional external dataset (hyperclean)
  int jobs = 1;
  int ma_window = 0;  // 0 = max(1, epochs/20); smooths the grid criterion

  // instance knobs
  int quad_dx = 5;
  int quad_dy = 5;
  int hc_train = 50;
  int hc_val = 50;
  int hc_features = 5;
  int hc_classes = 3;
  double hc_p_corrupt = 0.3;

  static ExperimentConfig from_file(const std::string& path);
  std::string to_json() const;
  void set_key(const std::string& key, const std::string& value);
  void validate() const;
};

struct TrialMetrics {
  double test_loss = std::numeric_limits<double>::quiet_NaN();
  double delta_y = std::numeric_limits<double>::quiet_NaN();
  double delta_x = std::numeric_limits<double>::quiet_NaN();
  double reference_loss = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  TrialMetrics metrics;
  std::vector<solver::EpochRecord> epochs;
  Eigen::VectorXd x_tail_avg;
  Eigen::MatrixXd W_tail_avg;
};

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  int n = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  std::vector<MetricSummary> summary;
  bool partial = false;  // some trial failed
};

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  int t_inner = 0;
  double criterion = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  std::string note;
};

struct GridReport {
  ExperimentConfig config;
  std::vector<GridCell> cells;
  solver::SolverConfig best;
};

ExperimentReport run_experiment(const ExperimentConfig& config);
GridReport run_grid_search(const ExperimentConfig& config);

/// Writes summary.csv, epochs.csv and config_echo.json under `dir`.
void emit_results(const ExperimentReport& report, const std::string& dir);
/// Writes grid.csv and config_echo.json under `dir`.
void emit_grid_results(const GridReport& report, const std::string& dir);

/// Quick oracle/property checks (CLI `verify`); returns the failure count.
int run_verify(std::uint64_t seed);

}  // namespace csbo::harness
