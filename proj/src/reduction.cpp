#include "csbo/reduction.hpp"

#include <stdexcept>

namespace csbo::reduction {

ReducedSbo::ReducedSbo(const problem::CsboProblem& prob, const basis::FeatureMap& map)
    : prob_(&prob), map_(&map) {
  if (map.context_dim() != prob.dxi())
    throw std::invalid_argument("ReducedSbo: feature map context dim mismatch");
}

void ReducedSbo::check_shapes(const VectorXd& x, const MatrixXd& W) const {
  if (x.size() != prob_->dx() || W.rows() != prob_->dy() || W.cols() != n())
    throw std::invalid_argument("ReducedSbo: shape mismatch");
}

VectorXd ReducedSbo::y_of(const MatrixXd& W, const VectorXd& xi) const {
  if (W.rows() != prob_->dy() || W.cols() != n())
    throw std::invalid_argument("ReducedSbo: W shape mismatch");
  return W * map_->evaluate(xi);
}

double ReducedSbo::f_value(const VectorXd& x, const MatrixXd& W,
                           const JointSample& s) const {
  check_shapes(x, W);
  return prob_->f_value(x, W * map_->evaluate(s.xi), s.xi, s.eta);
}

double ReducedSbo::g_value(const VectorXd& x, const MatrixXd& W,
                           const JointSample& s) const {
  check_shapes(x, W);
  return prob_->g_value(x, W * map_->evaluate(s.xi), s.xi, s.eta);
}

VectorXd ReducedSbo::grad_fphi_x(const VectorXd& x, const MatrixXd& W,
                                 const JointSample& s) const {
  check_shapes(x, W);
  return prob_->grad_f_x(x, W * map_->evaluate(s.xi), s.xi, s.eta);
}

MatrixXd ReducedSbo::grad_fphi_W(const VectorXd& x, const MatrixXd& W,
                                 const JointSample& s) const {
  check_shapes(x, W);
  const VectorXd phi = map_->evaluate(s.xi);
  return prob_->grad_f_y(x, W * phi, s.xi, s.eta) * phi.transpose();
}

MatrixXd ReducedSbo::grad_gphi_W(const VectorXd& x, const MatrixXd& W,
                                 const JointSample& s) const {
  check_shapes(x, W);
  const VectorXd phi = map_->evaluate(s.xi);
  return prob_->grad_g_y(x, W * phi, s.xi, s.eta) * phi.transpose();
}

MatrixXd ReducedSbo::hess_gphi_WW_apply(const VectorXd& x, const MatrixXd& W,
                                        const JointSample& s, const MatrixXd& V) const {
  check_shapes(x, W);
  if (V.rows() != W.rows() || V.cols() != W.cols())
    throw std::invalid_argument("hess_gphi_WW_apply: direction shape mismatch");
  const VectorXd phi = map_->evaluate(s.xi);
  const MatrixXd hyy = prob_->hess_g_yy(x, W * phi, s.xi, s.eta);
  return (hyy * (V * phi)) * phi.transpose();
}

VectorXd ReducedSbo::hess_gphi_xW_apply(const VectorXd& x, const MatrixXd& W,
                                        const JointSample& s, const MatrixXd& v) const {
  check_shapes(x, W);
  if (v.rows() != W.rows() || v.cols() != W.cols())
    throw std::invalid_argument("hess_gphi_xW_apply: direction shape mismatch");
  const VectorXd phi = map_->evaluate(s.xi);
  return prob_->hess_g_xy(x, W * phi, s.xi, s.eta) * (v * phi);
}

MatrixXd ReducedSbo::dense_hessian_WW(const VectorXd& x, const MatrixXd& W,
                                      const JointSample& s) const {
  check_shapes(x, W);
  const int dim = dy() * n();
  if (dim > 512)
    throw std::invalid_argument("dense_hessian_WW: d_y * N exceeds dense-size cap");
  const VectorXd phi = map_->evaluate(s.xi);
  const MatrixXd hyy = prob_->hess_g_yy(x, W * phi, s.xi, s.eta);
  MatrixXd h(dim, dim);
  for (int j1 = 0; j1 < n(); ++j1)
    for (int j2 = 0; j2 < n(); ++j2)
      h.block(j1 * dy(), j2 * dy(), dy(), dy()) = phi[j1] * phi[j2] * hyy;
  return h;
}

}  // namespace csbo::reduction
