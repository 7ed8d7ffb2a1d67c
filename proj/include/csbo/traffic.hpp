#pragma once

#include <random>

#include "csbo/problem.hpp"

namespace csbo::problem {

/// Inverse static traffic assignment on a two-edge, single-OD network.
///
/// Lower level: penalized Beckmann objective with BPR edge costs
///   t_e(y; x) = t0_e (1 + (y_e / x_e)^4)
/// plus quadratic penalties for unmet demand and negative flows, and a
/// small ridge restoring uniform strong convexity at the origin.
/// Upper level: smoothed Euclidean distance between the equilibrium flow
/// and the observed flow eta.
///
/// Each instance carries its own synthetic train/test datasets generated
/// from a ground-truth capacity vector x*.
class TrafficProblem : public CsboProblem {
 public:
  struct Params {
    double alpha = 1.0;
    double beta = 4.0;
    double lambda_demand = 100.0;
    double lambda_plus = 50.0;
    double mu0 = 1e-6;       // ridge
    double delta = 1e-8;     // upper-loss smoothing
    double sigma0 = 0.05;    // observation noise std
    double gen_tol = 1e-10;  // lower solve tolerance in data generation
    int n_train = 1000;
    int n_test = 1000;
  };

  explicit TrafficProblem(std::uint64_t seed);
  TrafficProblem(std::uint64_t seed, Params params);

  int dx() const override { return 2; }
  int dy() const override { return 2; }
  int dxi() const override { return 1; }
  int deta() const override { return 2; }
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
  std::string name() const override { return "traffic"; }

  const Params& params() const { return params_; }
  const VectorXd& x_star() const { return x_star_; }
  const VectorXd& t0() const { return t0_; }
  const std::vector<JointSample>& train() const { return train_; }
  const std::vector<JointSample>& test() const { return test_; }

  /// Equilibrium flow for given capacities and demand, solved by gradient
  /// descent on the deterministic lower objective.
  VectorXd solve_flow(const VectorXd& x, const VectorXd& xi, double tol) const;

 private:
  JointSample generate_sample(std::mt19937_64& rng) const;

  Params params_;
  basis::DomainBox domain_;
  VectorXd t0_, x_star_;
  std::vector<JointSample> train_, test_;
};

}  // namespace csbo::problem
