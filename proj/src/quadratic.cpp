#include "csbo/quadratic.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace csbo::problem {

QuadraticProblem::QuadraticProblem(int d_x, int d_y, std::uint64_t seed)
    : QuadraticProblem(d_x, d_y, seed, Params{}) {}

QuadraticProblem::QuadraticProblem(int d_x, int d_y, std::uint64_t seed, Params params)
    : d_x_(d_x),
      d_y_(d_y),
      params_(params),
      domain_(basis::DomainBox::unit(1)) {
  if (d_x < 1 || d_y < 1) throw std::invalid_argument("QuadraticProblem: dims >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd S(d_y, d_y);
  for (int i = 0; i < d_y; ++i)
    for (int j = 0; j < d_y; ++j) S(i, j) = gauss(rng) / std::sqrt(double(d_y));
  Q_ = MatrixXd::Identity(d_y, d_y) + 0.5 * S.transpose() * S;
  A_.resize(d_y, d_x);
  for (int i = 0; i < d_y; ++i)
    for (int j = 0; j < d_x; ++j) A_(i, j) = gauss(rng) / std::sqrt(double(d_x));
  c_.resize(d_y);
  d_.resize(d_y);
  for (int i = 0; i < d_y; ++i) c_[i] = gauss(rng);
  for (int i = 0; i < d_y; ++i) d_[i] = gauss(rng);
  Q_llt_.compute(Q_);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q_);
  mu_ = es.eigenvalues().minCoeff();
  q_lambda_max_ = es.eigenvalues().maxCoeff();
}

std::vector<JointSample> QuadraticProblem::sample_joint(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample_joint: n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<JointSample> out(n);
  for (auto& s : out) {
    s.xi = VectorXd::Constant(1, unif(rng));
    s.eta.resize(d_y_);
    const double mean = m(s.xi);
    for (int i = 0; i < d_y_; ++i) s.eta[i] = mean + params_.sigma * gauss(rng);
  }
  return out;
}

VectorXd QuadraticProblem::b(const VectorXd& xi) const {
  return c_ * std::sin(params_.omega * xi[0]) + d_;
}

VectorXd QuadraticProblem::y_star(const VectorXd& x, const VectorXd& xi) const {
  return Q_llt_.solve(A_ * x + b(xi) + VectorXd::Constant(d_y_, m(xi)));
}

double QuadraticProblem::f_value(const VectorXd& x, const VectorXd& y,
                                 const VectorXd&, const VectorXd& eta) const {
  return 0.5 * (y - eta).squaredNorm() + 0.5 * params_.lambda_x * x.squaredNorm();
}

VectorXd QuadraticProblem::grad_f_x(const VectorXd& x, const VectorXd&,
                                    const VectorXd&, const VectorXd&) const {
  return params_.lambda_x * x;
}

VectorXd QuadraticProblem::grad_f_y(const VectorXd&, const VectorXd& y,
                                    const VectorXd&, const VectorXd& eta) const {
  return y - eta;
}

double QuadraticProblem::g_value(const VectorXd& x, const VectorXd& y,
                                 const VectorXd& xi, const VectorXd& eta) const {
  return 0.5 * y.dot(Q_ * y) - y.dot(A_ * x + b(xi) + eta);
}

VectorXd QuadraticProblem::grad_g_y(const VectorXd& x, const VectorXd& y,
                                    const VectorXd& xi, const VectorXd& eta) const {
  return Q_ * y - (A_ * x + b(xi) + eta);
}

MatrixXd QuadraticProblem::hess_g_yy(const VectorXd&, const VectorXd&,
                                     const VectorXd&, const VectorXd&) const {
  return Q_;
}

MatrixXd QuadraticProblem::hess_g_xy(const VectorXd&, const VectorXd&,
                                     const VectorXd&, const VectorXd&) const {
  return -A_.transpose();
}

double QuadraticProblem::lower_value(const VectorXd& x, const VectorXd& y,
                                     const VectorXd& xi) const {
  const VectorXd eta_bar = VectorXd::Constant(d_y_, m(xi));
  return g_value(x, y, xi, eta_bar);
}

VectorXd QuadraticProblem::lower_grad(const VectorXd& x, const VectorXd& y,
                                      const VectorXd& xi) const {
  const VectorXd eta_bar = VectorXd::Constant(d_y_, m(xi));
  return grad_g_y(x, y, xi, eta_bar);
}

MatrixXd QuadraticProblem::lower_hess_yy(const VectorXd&, const VectorXd&,
                                         const VectorXd&) const {
  return Q_;
}

MatrixXd QuadraticProblem::lower_hess_xy(const VectorXd&, const VectorXd&,
                                         const VectorXd&) const {
  return -A_.transpose();
}

RegularityConstants QuadraticProblem::regularity_constants() const {
  RegularityConstants r;
  r.mu = mu_;
  // smoothness of g in (x, y): Hessian [[0, -A'], [-A, Q]]
  MatrixXd H = MatrixXd::Zero(d_x_ + d_y_, d_x_ + d_y_);
  H.block(0, d_x_, d_x_, d_y_) = -A_.transpose();
  H.block(d_x_, 0, d_y_, d_x_) = -A_;
  H.block(d_x_, d_x_, d_y_, d_y_) = Q_;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  r.L_g1 = es.eigenvalues().cwiseAbs().maxCoeff();
  r.L_g2 = 0.0;  // quadratic g, constant Hessian
  r.L_f1 = std::max(1.0, params_.lambda_x);
  // gradient bound of f on the unit-scale iterate region ||x||,||y-eta|| <= R
  const double R = 10.0;
  r.L_f0 = std::hypot(R, params_.lambda_x * R);
  r.estimated = true;
  r.note = "L_f0 bounded on the iterate region ||x||, ||y - eta|| <= 10";
  r.K = expressiveness_constant(r.L_f0, r.L_f1, r.L_g1, r.L_g2, r.mu);
  return r;
}

std::optional<VectorXd> QuadraticProblem::exact_lower_solution(const VectorXd& x,
                                                               const VectorXd& xi) const {
  return y_star(x, xi);
}

std::optional<double> QuadraticProblem::hess_yy_lambda_max() const {
  return q_lambda_max_;
}

double QuadraticProblem::exact_objective(const VectorXd& x,
                                         const std::vector<JointSample>& samples) const {
  double acc = 0.0;
  for (const auto& s : samples) acc += f_value(x, y_star(x, s.xi), s.xi, s.eta);
  return acc / samples.size();
}

VectorXd QuadraticProblem::exact_gradient(const VectorXd& x,
                                          const std::vector<JointSample>& samples) const {
  // dy*/dx = Q^{-1} A, so dF/dx = lambda_x x + A' Q^{-1} mean(y* - eta)
  VectorXd resid = VectorXd::Zero(d_y_);
  for (const auto& s : samples) resid += y_star(x, s.xi) - s.eta;
  resid /= samples.size();
  return params_.lambda_x * x + A_.transpose() * Q_llt_.solve(resid);
}

MatrixXd QuadraticProblem::reduced_w_star(const basis::FeatureMap& map,
                                          const std::vector<JointSample>& samples,
                                          const VectorXd& x) const {
  // Q W E[phi phi'] = E[(Ax + b + eta) phi']
  const int n = map.size();
  MatrixXd gram = MatrixXd::Zero(n, n);
  MatrixXd rhs = MatrixXd::Zero(d_y_, n);
  const VectorXd ax = A_ * x;
  for (const auto& s : samples) {
    const VectorXd phi = map.evaluate(s.xi);
    gram.noalias() += phi * phi.transpose();
    rhs.noalias() += (ax + b(s.xi) + s.eta) * phi.transpose();
  }
  gram /= samples.size();
  rhs /= samples.size();
  Eigen::LDLT<MatrixXd> gram_ldlt(gram);
  if (gram_ldlt.info() != Eigen::Success)
    throw std::runtime_error("reduced_w_star: degenerate Gram matrix");
  // W = Q^{-1} rhs gram^{-1}
  return Q_llt_.solve(gram_ldlt.solve(rhs.transpose()).transpose());
}

VectorXd QuadraticProblem::analytic_reduced_gradient(const basis::FeatureMap& map,
                                                     const std::vector<JointSample>& samples,
                                                     const VectorXd& x) const {
  const int n = map.size();
  const MatrixXd w_star = reduced_w_star(map, samples, x);
  MatrixXd gram = MatrixXd::Zero(n, n);
  VectorXd phi_mean = VectorXd::Zero(n);
  MatrixXd resid_phi = MatrixXd::Zero(d_y_, n);  // E[(W* phi - eta) phi']
  for (const auto& s : samples) {
    const VectorXd phi = map.evaluate(s.xi);
    gram.noalias() += phi * phi.transpose();
    phi_mean += phi;
    resid_phi.noalias() += (w_star * phi - s.eta) * phi.transpose();
  }
  gram /= samples.size();
  phi_mean /= samples.size();
  resid_phi /= samples.size();
  Eigen::LDLT<MatrixXd> gram_ldlt(gram);
  // grad = lambda_x x + A' Q^{-1} E[(W* phi - eta) phi'] gram^{-1} E[phi]
  return params_.lambda_x * x +
         A_.transpose() * Q_llt_.solve(resid_phi * gram_ldlt.solve(phi_mean));
}

}  // namespace csbo::problem
