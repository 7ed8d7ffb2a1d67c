#include "csbo/hyperclean.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace csbo::problem {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::Map<const MatrixXd> as_matrix(const VectorXd& y, int rows, int cols) {
  return Eigen::Map<const MatrixXd>(y.data(), rows, cols);
}

}  // namespace

HypercleanProblem::RawData HypercleanProblem::make_blobs(int n_train, int n_val,
                                                         int n_features, int n_classes,
                                                         std::uint64_t seed,
                                                         const Params& params) {
  if (n_train < 1 || n_val < 1 || n_features < 1 || n_classes < 2)
    throw std::invalid_argument("HypercleanProblem: bad dimensions");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // class means at blob_scale times random unit directions
  MatrixXd means(n_classes, n_features);
  for (int c = 0; c < n_classes; ++c) {
    VectorXd dir(n_features);
    for (int j = 0; j < n_features; ++j) dir[j] = gauss(rng);
    means.row(c) = params.blob_scale * dir.normalized().transpose();
  }
  const int n = n_train + n_val;
  RawData data;
  data.x.resize(n, n_features);
  data.labels.resize(n);
  std::uniform_int_distribution<int> cls(0, n_classes - 1);
  for (int i = 0; i < n; ++i) {
    data.labels[i] = cls(rng);
    for (int j = 0; j < n_features; ++j)
      data.x(i, j) = means(data.labels[i], j) + gauss(rng);
  }
  return data;
}

HypercleanProblem::HypercleanProblem(int n_train, int n_val, int n_features,
                                     int n_classes, double p_corrupt,
                                     std::uint64_t seed)
    : HypercleanProblem(n_train, n_val, n_features, n_classes, p_corrupt, seed,
                        Params{}) {}

HypercleanProblem::HypercleanProblem(int n_train, int n_val, int n_features,
                                     int n_classes, double p_corrupt,
                                     std::uint64_t seed, Params params)
    : HypercleanProblem(make_blobs(n_train, n_val, n_features, n_classes, seed, params),
                        n_train, n_classes, p_corrupt, seed, params) {}

HypercleanProblem::HypercleanProblem(RawData data, int n_train, int n_classes,
                                     double p_corrupt, std::uint64_t seed,
                                     Params params)
    : n_train_(n_train),
      n_val_(static_cast<int>(data.labels.size()) - n_train),
      n_features_(static_cast<int>(data.x.cols())),
      n_classes_(n_classes),
      params_(params),
      domain_(basis::DomainBox::interval(params.xi_low, params.xi_high)) {
  if (p_corrupt < 0.0 || p_corrupt >= 1.0)
    throw std::invalid_argument("HypercleanProblem: p_corrupt in [0, 1)");
  if (n_val_ < 1 || data.x.rows() != static_cast<long>(data.labels.size()))
    throw std::invalid_argument("HypercleanProblem: inconsistent data dimensions");
  params_.p_corrupt = p_corrupt;
  x_train_ = data.x.topRows(n_train_);
  x_val_ = data.x.bottomRows(n_val_);
  y_train_clean_.assign(data.labels.begin(), data.labels.begin() + n_train_);
  y_val_.assign(data.labels.begin() + n_train_, data.labels.end());
  for (int i = 0; i < static_cast<int>(data.labels.size()); ++i)
    if (data.labels[i] < 0 || data.labels[i] >= n_classes_)
      throw std::invalid_argument("HypercleanProblem: label out of range");
  // corrupt train labels with probability p
  y_train_ = y_train_clean_;
  std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, n_classes_ - 1);
  for (int i = 0; i < n_train_; ++i)
    if (u01(rng) < params_.p_corrupt) y_train_[i] = cls(rng);
}

HypercleanProblem HypercleanProblem::from_file(const std::string& path, int n_train,
                                               double p_corrupt,
                                               std::uint64_t seed) {
  return from_file(path, n_train, p_corrupt, seed, Params{});
}

HypercleanProblem HypercleanProblem::from_file(const std::string& path, int n_train,
                                               double p_corrupt, std::uint64_t seed,
                                               Params params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("HypercleanProblem: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error("HypercleanProblem: empty data file");
  const size_t width = rows[0].size();
  if (width < 2) throw std::runtime_error("HypercleanProblem: need features + label");
  RawData data;
  data.x.resize(rows.size(), width - 1);
  data.labels.resize(rows.size());
  int max_label = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width)
      throw std::runtime_error("HypercleanProblem: ragged data file");
    for (size_t j = 0; j + 1 < width; ++j) data.x(i, j) = rows[i][j];
    data.labels[i] = static_cast<int>(std::lround(rows[i].back()));
    max_label = std::max(max_label, data.labels[i]);
  }
  return HypercleanProblem(std::move(data), n_train, max_label + 1, p_corrupt,
                           seed, params);
}

std::vector<JointSample> HypercleanProblem::sample_joint(int n,
                                                         std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("sample_joint: n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uxi(params_.xi_low, params_.xi_high);
  std::uniform_int_distribution<int> itrain(0, n_train_ - 1), ival(0, n_val_ - 1);
  std::vector<JointSample> out(n);
  for (auto& s : out) {
    s.xi = VectorXd::Constant(1, uxi(rng));
    s.eta.resize(2);
    s.eta[0] = itrain(rng);
    s.eta[1] = ival(rng);
  }
  return out;
}

HypercleanProblem::LossEval HypercleanProblem::cross_entropy(const VectorXd& y,
                                                             const VectorXd& u,
                                                             int label) const {
  const VectorXd z = as_matrix(y, n_classes_, n_features_) * u;
  const double zmax = z.maxCoeff();
  const VectorXd ez = (z.array() - zmax).exp();
  const double denom = ez.sum();
  LossEval out;
  out.probs = ez / denom;
  out.value = std::log(denom) + zmax - z[label];
  return out;
}

double HypercleanProblem::f_value(const VectorXd&, const VectorXd& y,
                                  const VectorXd& xi, const VectorXd& eta) const {
  const int j = static_cast<int>(eta[1]);
  return cross_entropy(y, x_val_.row(j).transpose() / xi[0], y_val_[j]).value;
}

VectorXd HypercleanProblem::grad_f_x(const VectorXd&, const VectorXd&,
                                     const VectorXd&, const VectorXd&) const {
  return VectorXd::Zero(n_train_);
}

VectorXd HypercleanProblem::grad_f_y(const VectorXd&, const VectorXd& y,
                                     const VectorXd& xi, const VectorXd& eta) const {
  const int j = static_cast<int>(eta[1]);
  const VectorXd u = x_val_.row(j).transpose() / xi[0];
  LossEval e = cross_entropy(y, u, y_val_[j]);
  e.probs[y_val_[j]] -= 1.0;
  MatrixXd grad = e.probs * u.transpose();
  return Eigen::Map<VectorXd>(grad.data(), dy());
}

double HypercleanProblem::g_value(const VectorXd& x, const VectorXd& y,
                                  const VectorXd& xi, const VectorXd& eta) const {
  const int i = static_cast<int>(eta[0]);
  const VectorXd u = x_train_.row(i).transpose() / xi[0];
  return sigmoid(x[i]) * cross_entropy(y, u, y_train_[i]).value +
         params_.lambda * y.squaredNorm();
}

VectorXd HypercleanProblem::grad_g_y(const VectorXd& x, const VectorXd& y,
                                     const VectorXd& xi, const VectorXd& eta) const {
  const int i = static_cast<int>(eta[0]);
  const VectorXd u = x_train_.row(i).transpose() / xi[0];
  LossEval e = cross_entropy(y, u, y_train_[i]);
  e.probs[y_train_[i]] -= 1.0;
  MatrixXd grad = sigmoid(x[i]) * e.probs * u.transpose();
  return Eigen::Map<VectorXd>(grad.data(), dy()) + 2.0 * params_.lambda * y;
}

MatrixXd HypercleanProblem::hess_g_yy(const VectorXd& x, const VectorXd& y,
                                      const VectorXd& xi, const VectorXd& eta) const {
  const int i = static_cast<int>(eta[0]);
  const VectorXd u = x_train_.row(i).transpose() / xi[0];
  const LossEval e = cross_entropy(y, u, y_train_[i]);
  const MatrixXd curv =
      MatrixXd(e.probs.asDiagonal()) - e.probs * e.probs.transpose();
  const int d = dy();
  MatrixXd h(d, d);
  // column-major vec of the C x d_feat classifier: H = (u u') (x) curv
  for (int j1 = 0; j1 < n_features_; ++j1)
    for (int j2 = 0; j2 < n_features_; ++j2)
      h.block(j1 * n_classes_, j2 * n_classes_, n_classes_, n_classes_) =
          sigmoid(x[i]) * u[j1] * u[j2] * curv;
  h += 2.0 * params_.lambda * MatrixXd::Identity(d, d);
  return h;
}

MatrixXd HypercleanProblem::hess_g_xy(const VectorXd& x, const VectorXd& y,
                                      const VectorXd& xi, const VectorXd& eta) const {
  const int i = static_cast<int>(eta[0]);
  const VectorXd u = x_train_.row(i).transpose() / xi[0];
  LossEval e = cross_entropy(y, u, y_train_[i]);
  e.probs[y_train_[i]] -= 1.0;
  const double s = sigmoid(x[i]);
  MatrixXd grad = (s * (1.0 - s)) * e.probs * u.transpose();
  MatrixXd h = MatrixXd::Zero(n_train_, dy());
  h.row(i) = Eigen::Map<VectorXd>(grad.data(), dy()).transpose();
  return h;
}

double HypercleanProblem::lower_value(const VectorXd& x, const VectorXd& y,
                                      const VectorXd& xi) const {
  double acc = 0.0;
  for (int i = 0; i < n_train_; ++i) {
    const VectorXd u = x_train_.row(i).transpose() / xi[0];
    acc += sigmoid(x[i]) * cross_entropy(y, u, y_train_[i]).value;
  }
  return acc / n_train_ + params_.lambda * y.squaredNorm();
}

VectorXd HypercleanProblem::lower_grad(const VectorXd& x, const VectorXd& y,
                                       const VectorXd& xi) const {
  MatrixXd grad = MatrixXd::Zero(n_classes_, n_features_);
  for (int i = 0; i < n_train_; ++i) {
    const VectorXd u = x_train_.row(i).transpose() / xi[0];
    LossEval e = cross_entropy(y, u, y_train_[i]);
    e.probs[y_train_[i]] -= 1.0;
    grad.noalias() += sigmoid(x[i]) * e.probs * u.transpose();
  }
  grad /= n_train_;
  return Eigen::Map<VectorXd>(grad.data(), dy()) + 2.0 * params_.lambda * y;
}

MatrixXd HypercleanProblem::lower_hess_yy(const VectorXd& x, const VectorXd& y,
                                          const VectorXd& xi) const {
  const int d = dy();
  MatrixXd h = MatrixXd::Zero(d, d);
  for (int i = 0; i < n_train_; ++i) {
    const VectorXd u = x_train_.row(i).transpose() / xi[0];
    const LossEval e = cross_entropy(y, u, y_train_[i]);
    const MatrixXd curv =
        MatrixXd(e.probs.asDiagonal()) - e.probs * e.probs.transpose();
    const double s = sigmoid(x[i]) / n_train_;
    for (int j1 = 0; j1 < n_features_; ++j1)
      for (int j2 = 0; j2 < n_features_; ++j2)
        h.block(j1 * n_classes_, j2 * n_classes_, n_classes_, n_classes_) +=
            s * u[j1] * u[j2] * curv;
  }
  h += 2.0 * params_.lambda * MatrixXd::Identity(d, d);
  return h;
}

MatrixXd HypercleanProblem::lower_hess_xy(const VectorXd& x, const VectorXd& y,
                                          const VectorXd& xi) const {
  MatrixXd h = MatrixXd::Zero(n_train_, dy());
  for (int i = 0; i < n_train_; ++i) {
    const VectorXd u = x_train_.row(i).transpose() / xi[0];
    LossEval e = cross_entropy(y, u, y_train_[i]);
    e.probs[y_train_[i]] -= 1.0;
    const double s = sigmoid(x[i]);
    MatrixXd grad = (s * (1.0 - s) / n_train_) * e.probs * u.transpose();
    h.row(i) = Eigen::Map<VectorXd>(grad.data(), dy()).transpose();
  }
  return h;
}

VectorXd HypercleanProblem::solve_lower_newton(const VectorXd& x, const VectorXd& xi,
                                               double tol, int max_iters) const {
  VectorXd y = VectorXd::Zero(dy());
  double val = lower_value(x, y, xi);
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd g = lower_grad(x, y, xi);
    if (g.norm() <= tol) return y;
    const MatrixXd h = lower_hess_yy(x, y, xi);
    const VectorXd step = Eigen::LLT<MatrixXd>(h).solve(g);
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      const VectorXd y_try = y - t * step;
      const double v_try = lower_value(x, y_try, xi);
      if (v_try <= val - 1e-4 * t * g.dot(step)) {
        y = y_try;
        val = v_try;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // near the minimum the objective change is below double resolution;
      // accept steps on gradient-norm decrease instead
      const double gn = g.norm();
      t = 1.0;
      while (t > 1e-12) {
        const VectorXd y_try = y - t * step;
        if (lower_grad(x, y_try, xi).norm() < gn) {
          y = y_try;
          val = lower_value(x, y, xi);
          accepted = true;
          break;
        }
        t *= 0.5;
      }
    }
    if (!accepted)
      throw std::runtime_error("solve_lower_newton: line search stalled");
  }
  throw std::runtime_error("solve_lower_newton: did not converge");
}

double HypercleanProblem::validation_loss(const VectorXd& y, double xi) const {
  double acc = 0.0;
  for (int j = 0; j < n_val_; ++j)
    acc += cross_entropy(y, x_val_.row(j).transpose() / xi, y_val_[j]).value;
  return acc / n_val_;
}

RegularityConstants HypercleanProblem::regularity_constants() const {
  RegularityConstants r;
  r.mu = 2.0 * params_.lambda;  // ridge lower bound, exact
  // remaining constants probed at xi over the support and y near the origin
  double umax2 = 0.0;
  for (int i = 0; i < n_train_; ++i)
    umax2 = std::max(umax2, x_train_.row(i).squaredNorm());
  umax2 /= params_.xi_low * params_.xi_low;
  r.L_g1 = 0.5 * umax2 + 2.0 * params_.lambda;  // softmax curvature <= 1/2
  r.L_g2 = umax2 * std::sqrt(umax2);
  r.L_f0 = std::sqrt(2.0 * umax2);
  r.L_f1 = 0.5 * umax2;
  r.estimated = true;
  r.note = "bounds from max ||X_i / xi_low||; mu = 2 lambda is exact";
  r.K = expressiveness_constant(r.L_f0, r.L_f1, r.L_g1, r.L_g2, r.mu);
  return r;
}

}  // namespace csbo::problem
