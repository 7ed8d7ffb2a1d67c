#pragma once

#include "csbo/basis.hpp"
#include "csbo/problem.hpp"

namespace csbo::reduction {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using problem::JointSample;

/// The reduced single-lower-level problem obtained by parameterizing the
/// lower variable as y = W Phi(xi). Holds references only; both the problem
/// and the feature map must outlive this object.
///
/// All derivatives are chain-rule compositions of the underlying oracles;
/// second derivatives in W are applied matrix-free (the dense Kronecker form
/// is available for toy sizes via dense_hessian_WW).
class ReducedSbo {
 public:
  ReducedSbo(const problem::CsboProblem& prob, const basis::FeatureMap& map);

  const problem::CsboProblem& problem() const { return *prob_; }
  const basis::FeatureMap& map() const { return *map_; }
  int n() const { return map_->size(); }
  int dy() const { return prob_->dy(); }
  int dx() const { return prob_->dx(); }

  VectorXd y_of(const MatrixXd& W, const VectorXd& xi) const;

  double f_value(const VectorXd& x, const MatrixXd& W, const JointSample& s) const;
  double g_value(const VectorXd& x, const MatrixXd& W, const JointSample& s) const;

  VectorXd grad_fphi_x(const VectorXd& x, const MatrixXd& W, const JointSample& s) const;
  MatrixXd grad_fphi_W(const VectorXd& x, const MatrixXd& W, const JointSample& s) const;
  MatrixXd grad_gphi_W(const VectorXd& x, const MatrixXd& W, const JointSample& s) const;

  /// (hess_g_yy (V Phi)) Phi' — the Kronecker Hessian applied to V.
  MatrixXd hess_gphi_WW_apply(const VectorXd& x, const MatrixXd& W,
                              const JointSample& s, const MatrixXd& V) const;
  /// hess_g_xy (v Phi) — mixed second derivative applied to a W-shaped direction.
  VectorXd hess_gphi_xW_apply(const VectorXd& x, const MatrixXd& W,
                              const JointSample& s, const MatrixXd& v) const;

  /// Dense (d_y N) x (d_y N) Hessian w.r.t. the column-major vec of W,
  /// i.e. (Phi Phi') kron (hess_g_yy). Toy sizes only (d_y * N <= 512).
  MatrixXd dense_hessian_WW(const VectorXd& x, const MatrixXd& W,
                            const JointSample& s) const;

 private:
  void check_shapes(const VectorXd& x, const MatrixXd& W) const;
  const problem::CsboProblem* prob_;
  const basis::FeatureMap* map_;
};

}  // namespace csbo::reduction
