#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace csbo::basis {

/// Axis-aligned box support of the context variable. All feature maps
/// rescale their input affinely from this box to [-1,1]^d before
/// evaluating the 1-d atoms.
struct DomainBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  DomainBox(Eigen::VectorXd lo, Eigen::VectorXd up);
  static DomainBox unit(int d);                       // [-1,1]^d
  static DomainBox interval(double lo, double up);    // 1-d

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& xi, double tol = 1e-12) const;
  // affine map to [-1,1]^d
  Eigen::VectorXd rescale(const Eigen::VectorXd& xi) const;
};

enum class BasisKind { chebyshev, fourier, monomial, indicator };

const char* to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

/// Immutable family of N basis functions of the context. For the
/// polynomial/Fourier kinds, multi_indices holds per-dimension atom
/// indices in graded lexicographic order; for the indicator kind it
/// holds the cell ids 0..N-1 of an equal-width partition of the first
/// (and only) dimension.
class FeatureMap {
 public:
  FeatureMap(BasisKind kind, std::vector<std::vector<int>> multi_indices,
             DomainBox domain);

  BasisKind kind() const { return kind_; }
  const std::vector<std::vector<int>>& multi_indices() const { return idx_; }
  const DomainBox& domain() const { return domain_; }
  int size() const { return static_cast<int>(idx_.size()); }
  int context_dim() const { return domain_.dim(); }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& xi) const;
  // cell id for the indicator kind (right-open cells, last cell closed)
  int indicator_cell(double xi0) const;

 private:
  BasisKind kind_;
  std::vector<std::vector<int>> idx_;
  DomainBox domain_;
};

FeatureMap build_chebyshev(int d_xi, int max_total_entries, const DomainBox& domain);
FeatureMap build_fourier(int d_xi, int max_total_entries, const DomainBox& domain);
FeatureMap build_monomial(int d_xi, int max_total_entries, const DomainBox& domain);
FeatureMap build_indicator(int n_cells, const DomainBox& domain);

/// First `count` multi-indices in graded lexicographic order: sorted by
/// total degree, ties broken lexicographically (ascending).
std::vector<std::vector<int>> graded_lex_indices(int dim, int count);

struct BasisMetrics {
  double sup_norm = 1.0;  // estimate of M_Phi, clamped below at 1
  double min_eig = 1.0;   // estimate of m_Phi, clamped above at 1
  long n_samples = 0;
};

double estimate_sup_norm(const FeatureMap& map,
                         const std::vector<Eigen::VectorXd>& samples);
double estimate_min_eigenvalue(const FeatureMap& map,
                               const std::vector<Eigen::VectorXd>& samples);
BasisMetrics estimate_metrics(const FeatureMap& map,
                              const std::vector<Eigen::VectorXd>& samples);

/// sqrt(N) for Chebyshev (each atom bounded by 1), exactly 1 for the
/// indicator basis; NaN when no closed-form bound is available.
double analytic_sup_norm_bound(const FeatureMap& map);

/// Coefficients a_0..a_degree of f = sum_k a_k T_k on [-1,1], computed by
/// Chebyshev-Gauss quadrature at >= 4*(degree+1) nodes.
Eigen::VectorXd chebyshev_coefficients(const std::function<double(double)>& f,
                                       int degree);

/// Number of tensor-basis entries guaranteeing a uniform truncation error
/// of eps_tilde for a function with coefficient bound |a_k| <= 2M rho^-k.
long chebyshev_degree_for_tolerance(double eps_tilde, double M, double rho,
                                    int d_xi, int d_y);

}  // namespace csbo::basis
