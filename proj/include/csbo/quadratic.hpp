#pragma once

#include <memory>

#include "csbo/problem.hpp"

namespace csbo::problem {

/// Closed-form verification instance:
///   g(x, y, xi, eta) = 1/2 y'Qy - y'(Ax + b(xi) + eta)
///   f(x, y, xi, eta) = 1/2 ||y - eta||^2 + lambda_x/2 ||x||^2
/// with Q = I + 0.5 S'S (S fixed by seed), b(xi) = c sin(omega xi) + d,
/// eta = m(xi) 1 + eps, m(xi) = rho_m xi, eps ~ N(0, sigma^2 I),
/// xi ~ Uniform[-1, 1].
///
/// The conditional-mean lower solution is y*(x, xi) = Q^{-1}(Ax + b(xi) + m(xi) 1),
/// which makes exact objectives and gradients available in closed form.
class QuadraticProblem : public CsboProblem {
 public:
  struct Params {
    double lambda_x = 0.5;
    double omega = 3.0;
    double rho_m = 0.5;
    double sigma = 0.1;
  };

  QuadraticProblem(int d_x, int d_y, std::uint64_t seed);
  QuadraticProblem(int d_x, int d_y, std::uint64_t seed, Params params);

  int dx() const override { return d_x_; }
  int dy() const override { return d_y_; }
  int dxi() const override { return 1; }
  int deta() const override { return d_y_; }
  const basis::DomainBox& domain() const override { return domain_; }

  std::vector<JointSample> sample_joint(int n, std::uint64_t seed) const override;

  double f_value(const VectorXd&, const VectorXd&, const VectorXd&,
                 const VectorXd&) const override;
  VectorXd grad_f_x(const VectorXd&, const VectorXd&, const VectorXd&,
                    const VectorXd&) const override;
  VectorXd grad_f_y(const VectorXd&, const VectorXd&, const VectorXd&,
                    const VectorXd&) const override;
  double g_value(const VectorXd&, const VectorXd&, const VectorXd&,
                 const VectorXd&) const override;
  VectorXd grad_g_y(const VectorXd&, const VectorXd&, const VectorXd&,
                    const VectorXd&) const override;
  MatrixXd hess_g_yy(const VectorXd&, const VectorXd&, const VectorXd&,
                     const VectorXd&) const override;
  MatrixXd hess_g_xy(const VectorXd&, const VectorXd&, const VectorXd&,
                     const VectorXd&) const override;

  double lower_value(const VectorXd&, const VectorXd&, const VectorXd&) const override;
  VectorXd lower_grad(const VectorXd&, const VectorXd&, const VectorXd&) const override;
  MatrixXd lower_hess_yy(const VectorXd&, const VectorXd&, const VectorXd&) const override;
  MatrixXd lower_hess_xy(const VectorXd&, const VectorXd&, const VectorXd&) const override;

  RegularityConstants regularity_constants() const override;
  std::optional<VectorXd> exact_lower_solution(const VectorXd& x,
                                               const VectorXd& xi) const override;
  std::optional<double> hess_yy_lambda_max() const override;
  std::string name() const override { return "quadratic"; }

  // instance data
  const MatrixXd& Q() const { return Q_; }
  const MatrixXd& A() const { return A_; }
  const Params& params() const { return params_; }
  VectorXd b(const VectorXd& xi) const;
  double m(const VectorXd& xi) const { return params_.rho_m * xi[0]; }
  VectorXd y_star(const VectorXd& x, const VectorXd& xi) const;

  // exact empirical upper objective and its gradient over a fixed sample set
  double exact_objective(const VectorXd& x, const std::vector<JointSample>& samples) const;
  VectorXd exact_gradient(const VectorXd& x, const std::vector<JointSample>& samples) const;

  // closed-form reduced lower solution W*(x) over an empirical sample set,
  // and the analytic hypergradient of the reduced empirical objective
  MatrixXd reduced_w_star(const basis::FeatureMap& map,
                          const std::vector<JointSample>& samples,
                          const VectorXd& x) const;
  VectorXd analytic_reduced_gradient(const basis::FeatureMap& map,
                                     const std::vector<JointSample>& samples,
                                     const VectorXd& x) const;

 private:
  int d_x_, d_y_;
  Params params_;
  basis::DomainBox domain_;
  MatrixXd Q_, A_;
  Eigen::LLT<MatrixXd> Q_llt_;
  VectorXd c_, d_;
  double mu_, q_lambda_max_;
};

}  // namespace csbo::problem
