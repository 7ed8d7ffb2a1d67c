#pragma once

#include <functional>

#include "csbo/reduction.hpp"

namespace csbo::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using problem::JointSample;

/// Exact lower-level solution: closed form when the instance provides one,
/// otherwise backtracking gradient descent on the deterministic lower
/// objective to ||grad|| <= tol.
VectorXd solve_lower_exact(const problem::CsboProblem& prob, const VectorXd& x,
                           const VectorXd& xi, double tol);

/// Implicit-function hypergradient averaged over samples, with exact lower
/// solves and dense symmetric linear solves. Throws on a near-singular
/// Hessian (lambda_min < 1e-12).
VectorXd exact_hypergradient(const problem::CsboProblem& prob, const VectorXd& x,
                             const std::vector<JointSample>& samples, double tol);

/// Empirical upper objective F_hat(x) = mean_i f(x, y*(x, xi_i), xi_i, eta_i)
/// with exact lower solves; the scalar field differentiated by the FD oracle.
double empirical_upper_objective(const problem::CsboProblem& prob,
                                 const VectorXd& x,
                                 const std::vector<JointSample>& samples,
                                 double tol);

/// Exact minimizer of the empirical reduced lower objective: full-batch
/// gradient descent with backtracking to ||grad|| <= tol. Refuses dense-path
/// sizes d_y * N > 512 only where a dense solve is requested.
MatrixXd solve_reduced_lower_exact(const reduction::ReducedSbo& reduced,
                                   const VectorXd& x,
                                   const std::vector<JointSample>& train,
                                   double tol);

/// Hypergradient of the empirical reduced objective at W (typically W*(x)),
/// using a dense solve of the batch-mean reduced Hessian. Dense sizes only.
VectorXd exact_reduced_hypergradient(const reduction::ReducedSbo& reduced,
                                     const VectorXd& x, const MatrixXd& W,
                                     const std::vector<JointSample>& samples);

/// Central finite differences of a scalar field.
VectorXd finite_diff_gradient(const std::function<double(const VectorXd&)>& field,
                              const VectorXd& point, double h);

/// Least-squares projection of the exact lower solutions onto the basis:
/// W_ls = argmin_W mean_i ||W Phi(xi_i) - y*(x, xi_i)||^2, by normal equations.
MatrixXd least_squares_projection(const problem::CsboProblem& prob,
                                  const basis::FeatureMap& map, const VectorXd& x,
                                  const std::vector<JointSample>& samples,
                                  double tol);

}  // namespace csbo::oracle
