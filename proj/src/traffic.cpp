#include "csbo/traffic.hpp"

#include <cmath>
#include <stdexcept>

namespace csbo::problem {

namespace {
double pos(double z) { return z > 0.0 ? z : 0.0; }
double neg(double z) { return z < 0.0 ? -z : 0.0; }
}  // namespace

TrafficProblem::TrafficProblem(std::uint64_t seed)
    : TrafficProblem(seed, Params{}) {}

TrafficProblem::TrafficProblem(std::uint64_t seed, Params params)
    : params_(params), domain_(basis::DomainBox::interval(0.0, 1.0)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u_t0(1.0, 2.0), u_cap(0.2, 0.8);
  t0_.resize(2);
  x_star_.resize(2);
  for (int e = 0; e < 2; ++e) t0_[e] = u_t0(rng);
  for (int e = 0; e < 2; ++e) x_star_[e] = u_cap(rng);
  train_.reserve(params_.n_train);
  test_.reserve(params_.n_test);
  for (int i = 0; i < params_.n_train; ++i) train_.push_back(generate_sample(rng));
  for (int i = 0; i < params_.n_test; ++i) test_.push_back(generate_sample(rng));
}

JointSample TrafficProblem::generate_sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, params_.sigma0);
  JointSample s;
  s.xi = VectorXd::Constant(1, u01(rng));
  const VectorXd flow = solve_flow(x_star_, s.xi, params_.gen_tol);
  // resample the noise until the observation is non-negative
  while (true) {
    VectorXd eta = flow;
    for (int e = 0; e < 2; ++e) eta[e] += gauss(rng);
    if ((eta.array() >= 0.0).all()) {
      s.eta = eta;
      break;
    }
  }
  return s;
}

std::vector<JointSample> TrafficProblem::sample_joint(int n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample_joint: n >= 1");
  std::mt19937_64 rng(seed);
  std::vector<JointSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(generate_sample(rng));
  return out;
}

VectorXd TrafficProblem::solve_flow(const VectorXd& x, const VectorXd& xi,
                                    double tol) const {
  // split the demand evenly as a warm start
  const VectorXd y0 = VectorXd::Constant(2, 0.5 * xi[0]);
  return minimize_lower(*this, x, xi, tol, y0);
}

double TrafficProblem::f_value(const VectorXd&, const VectorXd& y, const VectorXd&,
                               const VectorXd& eta) const {
  return std::sqrt((y - eta).squaredNorm() + params_.delta * params_.delta);
}

VectorXd TrafficProblem::grad_f_x(const VectorXd&, const VectorXd&, const VectorXd&,
                                  const VectorXd&) const {
  return VectorXd::Zero(2);
}

VectorXd TrafficProblem::grad_f_y(const VectorXd& x, const VectorXd& y,
                                  const VectorXd& xi, const VectorXd& eta) const {
  return (y - eta) / f_value(x, y, xi, eta);
}

double TrafficProblem::g_value(const VectorXd& x, const VectorXd& y,
                               const VectorXd& xi, const VectorXd&) const {
  return lower_value(x, y, xi);
}

VectorXd TrafficProblem::grad_g_y(const VectorXd& x, const VectorXd& y,
                                  const VectorXd& xi, const VectorXd&) const {
  return lower_grad(x, y, xi);
}

MatrixXd TrafficProblem::hess_g_yy(const VectorXd& x, const VectorXd& y,
                                   const VectorXd& xi, const VectorXd&) const {
  return lower_hess_yy(x, y, xi);
}

MatrixXd TrafficProblem::hess_g_xy(const VectorXd& x, const VectorXd& y,
                                   const VectorXd& xi, const VectorXd&) const {
  return lower_hess_xy(x, y, xi);
}

double TrafficProblem::lower_value(const VectorXd& x, const VectorXd& y,
                                   const VectorXd& xi) const {
  const double a = params_.alpha, b = params_.beta;
  double val = 0.0;
  for (int e = 0; e < 2; ++e) {
    // int_0^y t_e(z; x) dz = t0 (y + a y^{b+1} / ((b+1) x^b)); the BPR part
    // is extended linearly below zero so the penalized objective stays convex
    const double yp = pos(y[e]);
    val += t0_[e] * (y[e] + a * std::pow(yp, b + 1.0) /
                                ((b + 1.0) * std::pow(x[e], b)));
  }
  val += params_.lambda_demand * pos(xi[0] - y.sum()) * pos(xi[0] - y.sum());
  for (int e = 0; e < 2; ++e) val += params_.lambda_plus * neg(y[e]) * neg(y[e]);
  val += 0.5 * params_.mu0 * y.squaredNorm();
  return val;
}

VectorXd TrafficProblem::lower_grad(const VectorXd& x, const VectorXd& y,
                                    const VectorXd& xi) const {
  const double a = params_.alpha, b = params_.beta;
  VectorXd g(2);
  const double unmet = pos(xi[0] - y.sum());
  for (int e = 0; e < 2; ++e) {
    g[e] = t0_[e] * (1.0 + a * std::pow(pos(y[e]) / x[e], b));
    g[e] -= 2.0 * params_.lambda_demand * unmet;
    g[e] += 2.0 * params_.lambda_plus * std::min(y[e], 0.0);
    g[e] += params_.mu0 * y[e];
  }
  return g;
}

MatrixXd TrafficProblem::lower_hess_yy(const VectorXd& x, const VectorXd& y,
                                       const VectorXd& xi) const {
  const double a = params_.alpha, b = params_.beta;
  MatrixXd h = MatrixXd::Zero(2, 2);
  for (int e = 0; e < 2; ++e) {
    h(e, e) = t0_[e] * a * b * std::pow(pos(y[e]), b - 1.0) / std::pow(x[e], b);
    if (y[e] < 0.0) h(e, e) += 2.0 * params_.lambda_plus;
    h(e, e) += params_.mu0;
  }
  if (xi[0] - y.sum() > 0.0)
    h.array() += 2.0 * params_.lambda_demand;  // rank-one 1 1'
  return h;
}

MatrixXd TrafficProblem::lower_hess_xy(const VectorXd& x, const VectorXd& y,
                                       const VectorXd&) const {
  const double a = params_.alpha, b = params_.beta;
  MatrixXd h = MatrixXd::Zero(2, 2);
  for (int e = 0; e < 2; ++e)
    h(e, e) = -t0_[e] * a * b * std::pow(pos(y[e]), b) / std::pow(x[e], b + 1.0);
  return h;
}

RegularityConstants TrafficProblem::regularity_constants() const {
  // region-restricted numerical estimates: global Lipschitz constants do not
  // exist for polynomial BPR costs, so probe the iterate region seen in practice
  RegularityConstants r;
  r.estimated = true;
  r.note =
      "probed on x in [0.2,0.8]^2, y in [0.02,1.2]^2, xi in [0,1], "
      "||y - eta|| >= sigma0/4";
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.2, 0.8), uy(0.02, 1.2), uxi(0.0, 1.0);
  double mu = std::numeric_limits<double>::infinity();
  double lg1 = 0.0, lg2 = 0.0, lf1 = 0.0;
  const double h_fd = 1e-5;
  for (int i = 0; i < 200; ++i) {
    VectorXd x(2), y(2), xi(1);
    x << ux(rng), ux(rng);
    y << uy(rng), uy(rng);
    xi << uxi(rng);
    VectorXd eta = y.array() + params_.sigma0;  // keep f curvature bounded
    const MatrixXd hyy = lower_hess_yy(x, y, xi);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hyy);
    mu = std::min(mu, es.eigenvalues().minCoeff());
    MatrixXd full(4, 4);
    full.setZero();
    full.topRightCorner(2, 2) = lower_hess_xy(x, y, xi);
    full.bottomLeftCorner(2, 2) = lower_hess_xy(x, y, xi).transpose();
    full.bottomRightCorner(2, 2) = hyy;
    Eigen::SelfAdjointEigenSolver<MatrixXd> esf(full);
    lg1 = std::max(lg1, esf.eigenvalues().cwiseAbs().maxCoeff());
    // Hessian Lipschitz estimate by differencing along y
    VectorXd y2 = y.array() + h_fd;
    lg2 = std::max(lg2, (lower_hess_yy(x, y2, xi) - hyy).norm() / (h_fd * std::sqrt(2.0)));
    // curvature of the smoothed norm is at most 1 / ||y - eta||
    lf1 = std::max(lf1, 1.0 / (y - eta).norm());
  }
  r.mu = std::max(mu, params_.mu0);
  r.L_g1 = lg1;
  r.L_g2 = lg2;
  r.L_f0 = 1.0;  // gradient of the smoothed norm has norm <= 1
  r.L_f1 = lf1;
  r.K = expressiveness_constant(r.L_f0, r.L_f1, r.L_g1, r.L_g2, r.mu);
  return r;
}

}  // namespace csbo::problem
