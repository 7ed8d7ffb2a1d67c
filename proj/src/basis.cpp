#include "csbo/basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace csbo::basis {

DomainBox::DomainBox(Eigen::VectorXd lo, Eigen::VectorXd up)
    : lower(std::move(lo)), upper(std::move(up)) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("DomainBox: dimension mismatch");
  for (int i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw std::invalid_argument("DomainBox: non-finite bound");
    if (!(lower[i] < upper[i]))
      throw std::invalid_argument("DomainBox: lower must be < upper");
  }
}

DomainBox DomainBox::unit(int d) {
  return DomainBox(Eigen::VectorXd::Constant(d, -1.0),
                   Eigen::VectorXd::Constant(d, 1.0));
}

DomainBox DomainBox::interval(double lo, double up) {
  Eigen::VectorXd l(1), u(1);
  l[0] = lo;
  u[0] = up;
  return DomainBox(l, u);
}

bool DomainBox::contains(const Eigen::VectorXd& xi, double tol) const {
  if (xi.size() != lower.size()) return false;
  for (int i = 0; i < xi.size(); ++i)
    if (xi[i] < lower[i] - tol || xi[i] > upper[i] + tol) return false;
  return true;
}

Eigen::VectorXd DomainBox::rescale(const Eigen::VectorXd& xi) const {
  Eigen::VectorXd z(xi.size());
  for (int i = 0; i < xi.size(); ++i) {
    z[i] = 2.0 * (xi[i] - lower[i]) / (upper[i] - lower[i]) - 1.0;
    z[i] = std::clamp(z[i], -1.0, 1.0);  // boundary rounding
  }
  return z;
}

const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::chebyshev: return "chebyshev";
    case BasisKind::fourier: return "fourier";
    case BasisKind::monomial: return "monomial";
    case BasisKind::indicator: return "indicator";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "chebyshev") return BasisKind::chebyshev;
  if (s == "fourier") return BasisKind::fourier;
  if (s == "monomial") return BasisKind::monomial;
  if (s == "indicator") return BasisKind::indicator;
  throw std::invalid_argument("unknown basis kind: " + s);
}

FeatureMap::FeatureMap(BasisKind kind, std::vector<std::vector<int>> multi_indices,
                       DomainBox domain)
    : kind_(kind), idx_(std::move(multi_indices)), domain_(std::move(domain)) {
  if (idx_.empty()) throw std::invalid_argument("FeatureMap: N must be >= 1");
  std::set<std::vector<int>> uniq(idx_.begin(), idx_.end());
  if (uniq.size() != idx_.size())
    throw std::invalid_argument("FeatureMap: duplicate multi-indices");
  if (kind_ == BasisKind::indicator) {
    if (domain_.dim() != 1)
      throw std::invalid_argument("indicator basis requires d_xi = 1");
  } else {
    for (const auto& mi : idx_)
      if (static_cast<int>(mi.size()) != domain_.dim())
        throw std::invalid_argument("FeatureMap: multi-index dim mismatch");
    if (!std::all_of(idx_[0].begin(), idx_[0].end(), [](int k) { return k == 0; }))
      throw std::invalid_argument("FeatureMap: first index must be all-zeros");
  }
}

namespace {

// value of the t-th 1-d atom at rescaled z, for each kind
void atom_values(BasisKind kind, double z, int max_t, std::vector<double>& out) {
  out.resize(max_t + 1);
  switch (kind) {
    case BasisKind::chebyshev: {
      // three-term recurrence T_{k+1} = 2 z T_k - T_{k-1}
      out[0] = 1.0;
      if (max_t >= 1) out[1] = z;
      for (int k = 2; k <= max_t; ++k) out[k] = 2.0 * z * out[k - 1] - out[k - 2];
      break;
    }
    case BasisKind::monomial: {
      out[0] = 1.0;
      for (int k = 1; k <= max_t; ++k) out[k] = out[k - 1] * z;
      break;
    }
    case BasisKind::fourier: {
      // atoms in order 1, cos(pi z), sin(pi z), cos(2 pi z), sin(2 pi z), ...
      out[0] = 1.0;
      for (int t = 1; t <= max_t; ++t) {
        int freq = (t + 1) / 2;
        out[t] = (t % 2 == 1) ? std::cos(M_PI * freq * z) : std::sin(M_PI * freq * z);
      }
      break;
    }
    case BasisKind::indicator:
      throw std::logic_error("atom_values: indicator has no atoms");
  }
}

}  // namespace

int FeatureMap::indicator_cell(double xi0) const {
  const int n = size();
  const double lo = domain_.lower[0], hi = domain_.upper[0];
  const double w = (hi - lo) / n;
  int cell = static_cast<int>(std::floor((xi0 - lo) / w));
  return std::clamp(cell, 0, n - 1);  // last cell right-closed
}

Eigen::VectorXd FeatureMap::evaluate(const Eigen::VectorXd& xi) const {
  if (!domain_.contains(xi))
    throw std::domain_error("FeatureMap::evaluate: xi outside domain box");
  const int n = size();
  Eigen::VectorXd phi(n);
  if (kind_ == BasisKind::indicator) {
    phi.setZero();
    phi[indicator_cell(xi[0])] = 1.0;
    return phi;
  }
  const Eigen::VectorXd z = domain_.rescale(xi);
  const int d = domain_.dim();
  std::vector<std::vector<double>> atoms(d);
  std::vector<int> max_t(d, 0);
  for (const auto& mi : idx_)
    for (int j = 0; j < d; ++j) max_t[j] = std::max(max_t[j], mi[j]);
  for (int j = 0; j < d; ++j) atom_values(kind_, z[j], max_t[j], atoms[j]);
  for (int i = 0; i < n; ++i) {
    double v = 1.0;
    for (int j = 0; j < d; ++j) v *= atoms[j][idx_[i][j]];
    phi[i] = v;
  }
  return phi;
}

std::vector<std::vector<int>> graded_lex_indices(int dim, int count) {
  if (dim < 1 || count < 1)
    throw std::invalid_argument("graded_lex_indices: dim and count must be >= 1");
  std::vector<std::vector<int>> out;
  out.reserve(count);
  for (int degree = 0; static_cast<int>(out.size()) < count; ++degree) {
    // enumerate compositions of `degree` into `dim` parts in lex order
    std::vector<int> mi(dim, 0);
    std::function<void(int, int)> rec = [&](int pos, int rem) {
      if (static_cast<int>(out.size()) >= count) return;
      if (pos == dim - 1) {
        mi[pos] = rem;
        out.push_back(mi);
        return;
      }
      for (int k = 0; k <= rem; ++k) {
        mi[pos] = k;
        rec(pos + 1, rem - k);
        if (static_cast<int>(out.size()) >= count) return;
      }
    };
    rec(0, degree);
  }
  return out;
}

namespace {
FeatureMap build_graded(BasisKind kind, int d_xi, int n, const DomainBox& domain) {
  if (d_xi < 1 || n < 1)
    throw std::invalid_argument("feature map: d_xi >= 1 and N >= 1 required");
  if (domain.dim() != d_xi)
    throw std::invalid_argument("feature map: domain dimension mismatch");
  return FeatureMap(kind, graded_lex_indices(d_xi, n), domain);
}
}  // namespace

FeatureMap build_chebyshev(int d_xi, int n, const DomainBox& domain) {
  return build_graded(BasisKind::chebyshev, d_xi, n, domain);
}
FeatureMap build_fourier(int d_xi, int n, const DomainBox& domain) {
  return build_graded(BasisKind::fourier, d_xi, n, domain);
}
FeatureMap build_monomial(int d_xi, int n, const DomainBox& domain) {
  return build_graded(BasisKind::monomial, d_xi, n, domain);
}

FeatureMap build_indicator(int n_cells, const DomainBox& domain) {
  if (n_cells < 1) throw std::invalid_argument("build_indicator: n_cells >= 1");
  if (domain.dim() != 1)
    throw std::invalid_argument("build_indicator: requires d_xi = 1");
  std::vector<std::vector<int>> ids(n_cells);
  for (int i = 0; i < n_cells; ++i) ids[i] = {i};
  return FeatureMap(BasisKind::indicator, std::move(ids), domain);
}

double estimate_sup_norm(const FeatureMap& map,
                         const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty())
    throw std::invalid_argument("estimate_sup_norm: empty sample list");
  double best = 0.0;
  for (const auto& xi : samples) best = std::max(best, map.evaluate(xi).norm());
  return std::max(1.0, best);
}

double estimate_min_eigenvalue(const FeatureMap& map,
                               const std::vector<Eigen::VectorXd>& samples) {
  const int n = map.size();
  if (static_cast<int>(samples.size()) < n) {
    std::ostringstream msg;
    msg << "estimate_min_eigenvalue: " << samples.size()
        << " samples cannot identify a rank-" << n << " covariance";
    throw std::invalid_argument(msg.str());
  }
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
  for (const auto& xi : samples) {
    const Eigen::VectorXd phi = map.evaluate(xi);
    sigma.noalias() += phi * phi.transpose();
  }
  sigma /= static_cast<double>(samples.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < 0.0 && lmin > -1e-12) lmin = 0.0;  // eigensolver round-off on PSD
  return std::min(1.0, lmin);
}

BasisMetrics estimate_metrics(const FeatureMap& map,
                              const std::vector<Eigen::VectorXd>& samples) {
  BasisMetrics m;
  m.sup_norm = estimate_sup_norm(map, samples);
  m.min_eig = estimate_min_eigenvalue(map, samples);
  m.n_samples = static_cast<long>(samples.size());
  return m;
}

double analytic_sup_norm_bound(const FeatureMap& map) {
  switch (map.kind()) {
    case BasisKind::chebyshev: return std::sqrt(static_cast<double>(map.size()));
    case BasisKind::indicator: return 1.0;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

Eigen::VectorXd chebyshev_coefficients(const std::function<double(double)>& f,
                                       int degree) {
  if (degree < 0) throw std::invalid_argument("chebyshev_coefficients: degree >= 0");
  const int m = 4 * (degree + 1);
  Eigen::VectorXd fx(m), theta(m);
  for (int j = 0; j < m; ++j) {
    theta[j] = M_PI * (j + 0.5) / m;
    fx[j] = f(std::cos(theta[j]));
    if (!std::isfinite(fx[j]))
      throw std::domain_error("chebyshev_coefficients: non-finite f at node");
  }
  Eigen::VectorXd a(degree + 1);
  for (int k = 0; k <= degree; ++k) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) s += fx[j] * std::cos(k * theta[j]);
    a[k] = (k == 0 ? 1.0 : 2.0) * s / m;
  }
  return a;
}

long chebyshev_degree_for_tolerance(double eps_tilde, double M, double rho,
                                    int d_xi, int d_y) {
  if (eps_tilde <= 0 || M <= 0 || d_xi < 1 || d_y < 1)
    throw std::invalid_argument("chebyshev_degree_for_tolerance: bad arguments");
  if (!(rho > 1.0 && rho <= std::exp(0.5)))
    throw std::invalid_argument("chebyshev_degree_for_tolerance: rho must be in (1, e^{1/2}]");
  const double u =
      eps_tilde / (M * std::sqrt(static_cast<double>(d_y))) *
      std::pow((rho - 1.0) / 2.0, d_xi);
  if (u <= 0.0 || u >= 1.0)
    throw std::domain_error(
        "chebyshev_degree_for_tolerance: tolerance too large for this (M, rho, d_xi); "
        "the truncation bound cannot reach it");
  const double v = 1.0 - std::pow(1.0 - u, 1.0 / d_xi);
  long n = static_cast<long>(std::ceil(-std::log(v) / std::log(rho)));
  n = std::max<long>(n, 1);
  long total = 1;
  for (int j = 0; j < d_xi; ++j) total *= n;
  return total;
}

}  // namespace csbo::basis
