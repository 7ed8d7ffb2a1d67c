#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csbo/reduction.hpp"

namespace csbo::solver {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using problem::JointSample;

struct SolverConfig {
  double alpha = 0.1;        // outer step size
  double beta = 0.1;         // inner step size
  int t_inner = 10;          // inner steps per outer step
  int k_neumann = 10;        // Neumann samples K
  double s_neumann = 1e-2;   // Neumann scaling s
  int batch = 32;
  int epochs = 10;
  std::uint64_t seed = 0;
  double tail_fraction = 0.1;  // averaging window, fraction of epochs
  bool timing = true;          // record wall times (off for byte-stable output)

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double upper_loss_train = 0.0;
  double upper_loss_val = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_estimate = 0.0;
  double wall_time = 0.0;  // seconds
};

struct RunResult {
  VectorXd x_final;
  MatrixXd W_final;
  VectorXd x_tail_avg;
  MatrixXd W_tail_avg;
  std::vector<EpochRecord> epochs;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NeumannDiagnostics {
  bool scaling_warning = false;  // s * lambda_max >= 1 on this instance
  double s_lambda_max = std::numeric_limits<double>::quiet_NaN();
};

/// Optional per-epoch validation metric evaluated at (x, W).
using ValMetric = std::function<double(const VectorXd&, const MatrixXd&)>;

/// t_inner steps of full-minibatch gradient descent on W over the given
/// samples. Throws DivergenceError when ||W|| exceeds 1e8.
MatrixXd inner_loop(const reduction::ReducedSbo& reduced, const VectorXd& x,
                    const MatrixXd& W_in, const std::vector<JointSample>& batch,
                    const SolverConfig& config);

/// Truncated-Neumann approximation of the inverse reduced Hessian applied
/// to v: s * sum_{j=0..K} prod_{k=1..j} (I - s H_k) [v], one sample per H_k,
/// products applied right-to-left and never materialized. K = samples.size().
MatrixXd neumann_inverse_apply(const reduction::ReducedSbo& reduced,
                               const VectorXd& x, const MatrixXd& W,
                               const MatrixXd& v,
                               const std::vector<JointSample>& samples, double s,
                               NeumannDiagnostics* diag = nullptr);

/// Minibatch hypergradient estimate: mean over the batch of
/// grad_fphi_x - hess_gphi_xW_apply(., q), with q the Neumann inverse-apply
/// of the batch-mean grad_fphi_W over the fresh neumann_samples.
VectorXd hypergradient(const reduction::ReducedSbo& reduced, const VectorXd& x,
                       const MatrixXd& W, const std::vector<JointSample>& batch,
                       const std::vector<JointSample>& neumann_samples,
                       const SolverConfig& config,
                       NeumannDiagnostics* diag = nullptr);

/// Full stocBiO-style run: per epoch, shuffle the training set, iterate
/// minibatches; per outer step run inner_loop (warm-started W), estimate the
/// hypergradient with fresh Neumann draws from the training pool, and step x.
/// Divergence is caught and reported through the failure flag.
RunResult run(const reduction::ReducedSbo& reduced,
              const std::vector<JointSample>& train, const SolverConfig& config,
              const VectorXd& x0 = VectorXd(), const MatrixXd& W0 = MatrixXd(),
              const ValMetric& val_metric = nullptr);

/// stocBiO[N] baseline: equal-width indicator partition of the (1-d) context
/// space into n_cells, each cell an independent lower-level vector.
RunResult run_partition_baseline(const problem::CsboProblem& prob, int n_cells,
                                 const std::vector<JointSample>& train,
                                 const SolverConfig& config,
                                 const VectorXd& x0 = VectorXd(),
                                 const ValMetric& val_metric = nullptr);

}  // namespace csbo::solver
