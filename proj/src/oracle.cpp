#include "csbo/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbo::oracle {

namespace {
constexpr double kSingularTol = 1e-12;
constexpr int kDenseCap = 512;

void require_well_conditioned(const MatrixXd& h, const char* where) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h);
  if (es.eigenvalues().minCoeff() < kSingularTol)
    throw std::runtime_error(std::string(where) +
                             ": near-singular Hessian (lambda_min < 1e-12)");
}
}  // namespace

VectorXd solve_lower_exact(const problem::CsboProblem& prob, const VectorXd& x,
                           const VectorXd& xi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_lower_exact: tol > 0");
  if (auto y = prob.exact_lower_solution(x, xi)) return *y;
  return problem::minimize_lower(prob, x, xi, tol, VectorXd::Zero(prob.dy()));
}

VectorXd exact_hypergradient(const problem::CsboProblem& prob, const VectorXd& x,
                             const std::vector<JointSample>& samples, double tol) {
  if (samples.empty())
    throw std::invalid_argument("exact_hypergradient: empty sample set");
  VectorXd acc = VectorXd::Zero(prob.dx());
  for (const auto& s : samples) {
    const VectorXd y = solve_lower_exact(prob, x, s.xi, tol);
    const MatrixXd hyy = prob.lower_hess_yy(x, y, s.xi);
    require_well_conditioned(hyy, "exact_hypergradient");
    const VectorXd v = Eigen::LDLT<MatrixXd>(hyy).solve(
        prob.grad_f_y(x, y, s.xi, s.eta));
    acc += prob.grad_f_x(x, y, s.xi, s.eta) - prob.lower_hess_xy(x, y, s.xi) * v;
  }
  return acc / static_cast<double>(samples.size());
}

double empirical_upper_objective(const problem::CsboProblem& prob,
                                 const VectorXd& x,
                                 const std::vector<JointSample>& samples,
                                 double tol) {
  if (samples.empty())
    throw std::invalid_argument("empirical_upper_objective: empty sample set");
  double acc = 0.0;
  for (const auto& s : samples)
    acc += prob.f_value(x, solve_lower_exact(prob, x, s.xi, tol), s.xi, s.eta);
  return acc / static_cast<double>(samples.size());
}

MatrixXd solve_reduced_lower_exact(const reduction::ReducedSbo& reduced,
                                   const VectorXd& x,
                                   const std::vector<JointSample>& train,
                                   double tol) {
  if (train.empty())
    throw std::invalid_argument("solve_reduced_lower_exact: empty training set");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_reduced_lower_exact: tol > 0");
  const double inv = 1.0 / static_cast<double>(train.size());
  auto value = [&](const MatrixXd& W) {
    double v = 0.0;
    for (const auto& s : train) v += reduced.g_value(x, W, s);
    return v * inv;
  };
  auto gradient = [&](const MatrixXd& W) {
    MatrixXd g = MatrixXd::Zero(reduced.dy(), reduced.n());
    for (const auto& s : train) g += reduced.grad_gphi_W(x, W, s);
    return MatrixXd(g * inv);
  };

  MatrixXd W = MatrixXd::Zero(reduced.dy(), reduced.n());
  double step = 1.0;
  // see minimize_lower: once objective decrements fall below double
  // resolution, backtrack on the gradient norm instead
  bool gn_mode = false;
  const long cap = 1000000;
  for (long it = 0; it < cap; ++it) {
    const MatrixXd g = gradient(W);
    const double gn2 = g.squaredNorm();
    if (std::sqrt(gn2) <= tol) return W;
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    if (!gn_mode) {
      const double v0 = value(W);
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                           (1.0 + std::abs(v0));
      while (step >= 1e-18) {
        const double required = 0.5 * step * gn2;
        if (required < floor) break;
        const MatrixXd trial = W - step * g;
        const double v1 = value(trial);
        if (std::isfinite(v1) && v1 <= v0 - required) {
          W = trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        gn_mode = true;
        step = 1.0;
      }
    }
    if (gn_mode) {
      const double gn = std::sqrt(gn2);
      while (step >= 1e-18) {
        const MatrixXd trial = W - step * g;
        if (gradient(trial).norm() < gn) {
          W = trial;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted)
      throw std::runtime_error(
          "solve_reduced_lower_exact: line search failed (degenerate Gram?)");
  }
  throw std::runtime_error("solve_reduced_lower_exact: iteration cap exceeded");
}

VectorXd exact_reduced_hypergradient(const reduction::ReducedSbo& reduced,
                                     const VectorXd& x, const MatrixXd& W,
                                     const std::vector<JointSample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("exact_reduced_hypergradient: empty sample set");
  const int dim = reduced.dy() * reduced.n();
  if (dim > kDenseCap)
    throw std::invalid_argument(
        "exact_reduced_hypergradient: d_y * N exceeds dense-size cap");
  const double inv = 1.0 / static_cast<double>(samples.size());

  MatrixXd hbar = MatrixXd::Zero(dim, dim);
  MatrixXd gW = MatrixXd::Zero(reduced.dy(), reduced.n());
  VectorXd gx = VectorXd::Zero(reduced.dx());
  for (const auto& s : samples) {
    hbar += reduced.dense_hessian_WW(x, W, s);
    gW += reduced.grad_fphi_W(x, W, s);
    gx += reduced.grad_fphi_x(x, W, s);
  }
  hbar *= inv;
  gW *= inv;
  gx *= inv;
  require_well_conditioned(hbar, "exact_reduced_hypergradient");

  const Eigen::Map<const VectorXd> gW_vec(gW.data(), dim);
  const VectorXd q_vec = Eigen::LDLT<MatrixXd>(hbar).solve(gW_vec);
  const Eigen::Map<const MatrixXd> q(q_vec.data(), reduced.dy(), reduced.n());

  VectorXd correction = VectorXd::Zero(reduced.dx());
  for (const auto& s : samples)
    correction += reduced.hess_gphi_xW_apply(x, W, s, q);
  return gx - inv * correction;
}

VectorXd finite_diff_gradient(const std::function<double(const VectorXd&)>& field,
                              const VectorXd& point, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h > 0");
  VectorXd g(point.size());
  for (int i = 0; i < point.size(); ++i) {
    VectorXd p = point, m = point;
    p[i] += h;
    m[i] -= h;
    const double fp = field(p), fm = field(m);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_diff_gradient: non-finite evaluation");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

MatrixXd least_squares_projection(const problem::CsboProblem& prob,
                                  const basis::FeatureMap& map, const VectorXd& x,
                                  const std::vector<JointSample>& samples,
                                  double tol) {
  if (samples.empty())
    throw std::invalid_argument("least_squares_projection: empty sample set");
  const int n = map.size();
  const double inv = 1.0 / static_cast<double>(samples.size());
  MatrixXd gram = MatrixXd::Zero(n, n);
  MatrixXd rhs = MatrixXd::Zero(prob.dy(), n);
  for (const auto& s : samples) {
    const VectorXd phi = map.evaluate(s.xi);
    gram += phi * phi.transpose();
    rhs += solve_lower_exact(prob, x, s.xi, tol) * phi.transpose();
  }
  gram *= inv;
  rhs *= inv;
  require_well_conditioned(gram, "least_squares_projection");
  return Eigen::LDLT<MatrixXd>(gram).solve(rhs.transpose()).transpose();
}

}  // namespace csbo::oracle
