#pragma once

#include <string>

#include "csbo/problem.hpp"

namespace csbo::problem {

/// Data hyper-cleaning with temperature-scaled logits.
///
/// Upper variable x holds one weight per training example; the lower-level
/// classifier y (a n_classes x n_features matrix, stored column-major in a
/// vector) minimizes the sigmoid-weighted, ridge-regularized cross-entropy
/// of the logits y X_i / xi over the training set. A fraction p of the
/// training labels is replaced by a uniformly random class.
///
/// eta encodes a (train index, validation index) pair: g touches the train
/// example, f the validation example.
class HypercleanProblem : public CsboProblem {
 public:
  struct Params {
    double lambda = 1e-3;
    double p_corrupt = 0.3;
    double xi_low = 0.1;
    double xi_high = 10.0;
    double blob_scale = 1.5;  // class-mean separation of the synthetic blobs
  };

  HypercleanProblem(int n_train, int n_val, int n_features, int n_classes,
                    double p_corrupt, std::uint64_t seed);
  HypercleanProblem(int n_train, int n_val, int n_features, int n_classes,
                    double p_corrupt, std::uint64_t seed, Params params);

  /// Build from a delimited-text matrix file (rows = examples, last column =
  /// integer label); the first n_train rows form the training split.
  static HypercleanProblem from_file(const std::string& path, int n_train,
                                     double p_corrupt, std::uint64_t seed);
  static HypercleanProblem from_file(const std::string& path, int n_train,
                                     double p_corrupt, std::uint64_t seed,
                                     Params params);

  int dx() const override { return n_train_; }
  int dy() const override { return n_classes_ * n_features_; }
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
  std::string name() const override { return "hyperclean"; }

  /// Full-batch Newton solve of the lower level, used for metric evaluation
  /// where plain gradient descent is impractical at small xi.
  VectorXd solve_lower_newton(const VectorXd& x, const VectorXd& xi, double tol,
                              int max_iters = 500) const;

  /// Mean validation cross-entropy at classifier y with temperature xi.
  double validation_loss(const VectorXd& y, double xi) const;

  int n_train() const { return n_train_; }
  int n_val() const { return n_val_; }
  int n_classes() const { return n_classes_; }
  int n_features() const { return n_features_; }
  const std::vector<int>& train_labels() const { return y_train_; }
  const std::vector<int>& clean_train_labels() const { return y_train_clean_; }

 private:
  struct RawData {
    MatrixXd x;               // all examples, train rows first
    std::vector<int> labels;
  };
  static RawData make_blobs(int n_train, int n_val, int n_features, int n_classes,
                            std::uint64_t seed, const Params& params);
  HypercleanProblem(RawData data, int n_train, int n_classes, double p_corrupt,
                    std::uint64_t seed, Params params);

  // softmax pieces at logits Ymat * u
  struct LossEval {
    double value;
    VectorXd probs;
  };
  LossEval cross_entropy(const VectorXd& y, const VectorXd& u, int label) const;

  int n_train_, n_val_, n_features_, n_classes_;
  Params params_;
  basis::DomainBox domain_;
  MatrixXd x_train_, x_val_;         // n x d feature rows
  std::vector<int> y_train_, y_val_; // possibly corrupted train labels
  std::vector<int> y_train_clean_;
};

}  // namespace csbo::problem
