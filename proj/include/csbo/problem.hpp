#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csbo/basis.hpp"

namespace csbo::problem {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One draw (xi, eta) from the joint context/noise distribution.
struct JointSample {
  VectorXd xi;
  VectorXd eta;
};

/// Lipschitz/strong-convexity constants of an instance, plus the derived
/// constant K governing the hypergradient approximation error.
struct RegularityConstants {
  double L_f0 = 0, L_f1 = 0, L_g1 = 0, L_g2 = 0, mu = 0;
  double K = 0;
  bool estimated = false;  // true when probed numerically on a sample grid
  std::string note;
};

double expressiveness_constant(double L_f0, double L_f1, double L_g1,
                               double L_g2, double mu);

/// Oracle interface of a contextual stochastic bilevel instance.
///
/// All derivative oracles are deterministic functions of (x, y, xi, eta).
/// The lower_* family evaluates the conditional-expectation lower objective
/// G(x, y, xi) = E_{eta|xi} g (or the full-batch empirical objective when the
/// conditional expectation has no closed form); it is what exact lower-level
/// solves minimize.
class CsboProblem {
 public:
  virtual ~CsboProblem() = default;

  virtual int dx() const = 0;
  virtual int dy() const = 0;
  virtual int dxi() const = 0;
  virtual int deta() const = 0;
  virtual const basis::DomainBox& domain() const = 0;

  virtual std::vector<JointSample> sample_joint(int n, std::uint64_t seed) const = 0;

  virtual double f_value(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                         const VectorXd& eta) const = 0;
  virtual VectorXd grad_f_x(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                            const VectorXd& eta) const = 0;
  virtual VectorXd grad_f_y(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                            const VectorXd& eta) const = 0;

  virtual double g_value(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                         const VectorXd& eta) const = 0;
  virtual VectorXd grad_g_y(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                            const VectorXd& eta) const = 0;
  virtual MatrixXd hess_g_yy(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                             const VectorXd& eta) const = 0;
  // mixed derivative, d_x x d_y
  virtual MatrixXd hess_g_xy(const VectorXd& x, const VectorXd& y, const VectorXd& xi,
                             const VectorXd& eta) const = 0;

  virtual double lower_value(const VectorXd& x, const VectorXd& y,
                             const VectorXd& xi) const = 0;
  virtual VectorXd lower_grad(const VectorXd& x, const VectorXd& y,
                              const VectorXd& xi) const = 0;
  virtual MatrixXd lower_hess_yy(const VectorXd& x, const VectorXd& y,
                                 const VectorXd& xi) const = 0;
  virtual MatrixXd lower_hess_xy(const VectorXd& x, const VectorXd& y,
                                 const VectorXd& xi) const = 0;

  virtual RegularityConstants regularity_constants() const = 0;

  /// Closed-form lower-level solution, when the instance has one.
  virtual std::optional<VectorXd> exact_lower_solution(const VectorXd& x,
                                                       const VectorXd& xi) const {
    return std::nullopt;
  }
  /// Analytic bound on the largest eigenvalue of hess_g_yy, when known.
  virtual std::optional<double> hess_yy_lambda_max() const { return std::nullopt; }

  virtual std::string name() const = 0;
};

/// Backtracking gradient descent on y -> lower_value(x, y, xi), run until
/// ||lower_grad|| <= tol. Throws on iteration-cap exhaustion.
VectorXd minimize_lower(const CsboProblem& prob, const VectorXd& x,
                        const VectorXd& xi, double tol, const VectorXd& y0,
                        long max_iters = 1000000);

}  // namespace csbo::problem
