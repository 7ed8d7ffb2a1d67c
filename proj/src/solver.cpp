#include "csbo/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace csbo::solver {

namespace {
constexpr double kDivergenceNorm = 1e8;

void check_finite(const MatrixXd& W, const char* where) {
  if (!W.allFinite())
    throw DivergenceError(std::string(where) + ": non-finite iterate");
}
}  // namespace

void SolverConfig::validate() const {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(s_neumann > 0.0))
    throw std::invalid_argument("SolverConfig: step sizes must be positive");
  if (t_inner < 1 || k_neumann < 1 || batch < 1 || epochs < 1)
    throw std::invalid_argument(
        "SolverConfig: t_inner, k_neumann, batch, epochs must be >= 1");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    throw std::invalid_argument("SolverConfig: tail_fraction must be in (0,1]");
}

MatrixXd inner_loop(const reduction::ReducedSbo& reduced, const VectorXd& x,
                    const MatrixXd& W_in, const std::vector<JointSample>& batch,
                    const SolverConfig& config) {
  if (batch.empty()) throw std::invalid_argument("inner_loop: empty batch");
  if (config.t_inner < 1) throw std::invalid_argument("inner_loop: t_inner >= 1");
  MatrixXd W = W_in;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (int t = 0; t < config.t_inner; ++t) {
    MatrixXd grad = MatrixXd::Zero(W.rows(), W.cols());
    for (const auto& s : batch) grad += reduced.grad_gphi_W(x, W, s);
    W -= config.beta * inv * grad;
    check_finite(W, "inner_loop");
    if (W.norm() > kDivergenceNorm)
      throw DivergenceError("inner_loop: ||W|| exceeded 1e8 at beta = " +
                            std::to_string(config.beta));
  }
  return W;
}

MatrixXd neumann_inverse_apply(const reduction::ReducedSbo& reduced,
                               const VectorXd& x, const MatrixXd& W,
                               const MatrixXd& v,
                               const std::vector<JointSample>& samples, double s,
                               NeumannDiagnostics* diag) {
  if (!(s > 0.0)) throw std::invalid_argument("neumann_inverse_apply: s > 0");
  if (diag) {
    *diag = NeumannDiagnostics{};
    if (auto lmax = reduced.problem().hess_yy_lambda_max()) {
      diag->s_lambda_max = s * *lmax;
      diag->scaling_warning = diag->s_lambda_max >= 1.0;
    }
  }
  MatrixXd term = v;    // prod_{k<=j} (I - s H_k) v
  MatrixXd sum = v;     // sum_{j=0..current}
  for (const auto& sample : samples) {
    term -= s * reduced.hess_gphi_WW_apply(x, W, sample, term);
    sum += term;
  }
  return s * sum;
}

VectorXd hypergradient(const reduction::ReducedSbo& reduced, const VectorXd& x,
                       const MatrixXd& W, const std::vector<JointSample>& batch,
                       const std::vector<JointSample>& neumann_samples,
                       const SolverConfig& config, NeumannDiagnostics* diag) {
  if (batch.empty()) throw std::invalid_argument("hypergradient: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  MatrixXd gW = MatrixXd::Zero(W.rows(), W.cols());
  VectorXd gx = VectorXd::Zero(x.size());
  for (const auto& s : batch) {
    gx += reduced.grad_fphi_x(x, W, s);
    gW += reduced.grad_fphi_W(x, W, s);
  }
  gx *= inv;
  gW *= inv;
  const MatrixXd q = neumann_inverse_apply(reduced, x, W, gW, neumann_samples,
                                           config.s_neumann, diag);
  VectorXd correction = VectorXd::Zero(x.size());
  for (const auto& s : batch) correction += reduced.hess_gphi_xW_apply(x, W, s, q);
  VectorXd h = gx - inv * correction;
  if (!h.allFinite()) throw DivergenceError("hypergradient: non-finite estimate");
  return h;
}

RunResult run(const reduction::ReducedSbo& reduced,
              const std::vector<JointSample>& train, const SolverConfig& config,
              const VectorXd& x0, const MatrixXd& W0, const ValMetric& val_metric) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("run: empty training set");

  RunResult res;
  res.seed = config.seed;
  VectorXd x = x0.size() ? x0 : VectorXd::Zero(reduced.dx());
  MatrixXd W = W0.size() ? W0 : MatrixXd::Zero(reduced.dy(), reduced.n());
  if (x.size() != reduced.dx() || (W0.size() && (W.rows() != reduced.dy() ||
                                                 W.cols() != reduced.n())))
    throw std::invalid_argument("run: initial point shape mismatch");

  std::mt19937_64 rng(config.seed);
  const auto n = train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  const int tail = std::max(1, static_cast<int>(
      std::ceil(config.tail_fraction * config.epochs)));
  std::vector<VectorXd> x_hist;
  std::vector<MatrixXd> W_hist;

  try {
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      const auto t_start = std::chrono::steady_clock::now();
      std::shuffle(order.begin(), order.end(), rng);
      double grad_norm_sum = 0.0;
      int steps = 0;
      for (std::size_t lo = 0; lo < n; lo += config.batch) {
        const std::size_t hi = std::min(n, lo + config.batch);
        std::vector<JointSample> batch;
        batch.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) batch.push_back(train[order[i]]);
        W = inner_loop(reduced, x, W, batch, config);
        std::vector<JointSample> draws;
        draws.reserve(config.k_neumann);
        for (int k = 0; k < config.k_neumann; ++k)
          draws.push_back(train[pick(rng)]);
        const VectorXd h = hypergradient(reduced, x, W, batch, draws, config);
        x -= config.alpha * h;
        if (!x.allFinite() || x.norm() > kDivergenceNorm)
          throw DivergenceError("run: x diverged at alpha = " +
                                std::to_string(config.alpha));
        grad_norm_sum += h.norm();
        ++steps;
      }

      EpochRecord rec;
      rec.epoch = epoch;
      double loss = 0.0;
      for (const auto& s : train) loss += reduced.f_value(x, W, s);
      rec.upper_loss_train = loss / static_cast<double>(n);
      if (val_metric) rec.upper_loss_val = val_metric(x, W);
      rec.grad_norm_estimate = steps ? grad_norm_sum / steps : 0.0;
      if (config.timing) {
        const auto t_end = std::chrono::steady_clock::now();
        rec.wall_time = std::chrono::duration<double>(t_end - t_start).count();
      }
      res.epochs.push_back(rec);
      x_hist.push_back(x);
      W_hist.push_back(W);
    }
  } catch (const DivergenceError& e) {
    res.failed = true;
    res.failure = e.what();
  }

  res.x_final = x;
  res.W_final = W;
  if (!x_hist.empty()) {
    const int from = std::max(0, static_cast<int>(x_hist.size()) - tail);
    VectorXd xs = VectorXd::Zero(x.size());
    MatrixXd Ws = MatrixXd::Zero(W.rows(), W.cols());
    int count = 0;
    for (int i = from; i < static_cast<int>(x_hist.size()); ++i, ++count) {
      xs += x_hist[i];
      Ws += W_hist[i];
    }
    res.x_tail_avg = xs / count;
    res.W_tail_avg = Ws / count;
  } else {
    res.x_tail_avg = x;
    res.W_tail_avg = W;
  }
  return res;
}

RunResult run_partition_baseline(const problem::CsboProblem& prob, int n_cells,
                                 const std::vector<JointSample>& train,
                                 const SolverConfig& config, const VectorXd& x0,
                                 const ValMetric& val_metric) {
  if (prob.dxi() != 1)
    throw std::invalid_argument("run_partition_baseline: context must be 1-d");
  const basis::FeatureMap map = basis::build_indicator(n_cells, prob.domain());
  const reduction::ReducedSbo reduced(prob, map);
  return run(reduced, train, config, x0, MatrixXd(), val_metric);
}

}  // namespace csbo::solver
