#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "csbo/basis.hpp"
#include "doctest.h"

using namespace csbo::basis;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double v) { return VectorXd::Constant(1, v); }

// exact integral of T_k over [-1,1]: 2/(1-k^2) for even k, 0 for odd k
double integral_T(int k) {
  if (k % 2 == 1) return 0.0;
  return 2.0 / (1.0 - static_cast<double>(k) * k);
}

// exact B_ij = (1/2) * integral of T_i T_j over [-1,1] via the product rule
// T_i T_j = (T_{i+j} + T_{|i-j|}) / 2
MatrixXd exact_gram(int n) {
  MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b(i, j) = 0.25 * (integral_T(i + j) + integral_T(std::abs(i - j)));
  return b;
}

}  // namespace

TEST_CASE("graded lexicographic multi-index order") {
  const auto one_d = graded_lex_indices(1, 3);
  REQUIRE(one_d.size() == 3);
  CHECK(one_d[0] == std::vector<int>{0});
  CHECK(one_d[1] == std::vector<int>{1});
  CHECK(one_d[2] == std::vector<int>{2});

  const auto two_d = graded_lex_indices(2, 4);
  REQUIRE(two_d.size() == 4);
  CHECK(two_d[0] == std::vector<int>{0, 0});
  int deg0 = 0, deg1 = 0, deg2 = 0;
  for (const auto& idx : two_d) {
    const int d = idx[0] + idx[1];
    if (d == 0) ++deg0;
    if (d == 1) ++deg1;
    if (d == 2) ++deg2;
  }
  CHECK(deg0 == 1);
  CHECK(deg1 == 2);
  CHECK(deg2 == 1);
}

TEST_CASE("chebyshev map construction and evaluation") {
  const auto dom = DomainBox::unit(1);
  const auto map = build_chebyshev(1, 3, dom);
  REQUIRE(map.size() == 3);
  const VectorXd phi = map.evaluate(vec1(0.5));
  CHECK(phi[0] == doctest::Approx(1.0));
  CHECK(phi[1] == doctest::Approx(0.5));
  CHECK(phi[2] == doctest::Approx(-0.5));

  const auto map1 = build_chebyshev(1, 1, dom);
  CHECK(map1.evaluate(vec1(-0.3))[0] == doctest::Approx(1.0));

  const auto shifted = build_chebyshev(1, 2, DomainBox::interval(0.0, 2.0));
  const VectorXd p2 = shifted.evaluate(vec1(1.5));
  CHECK(p2[0] == doctest::Approx(1.0));
  CHECK(p2[1] == doctest::Approx(0.5));

  CHECK_THROWS(map.evaluate(vec1(1.5)));
}

TEST_CASE("chebyshev recurrence matches cos(k arccos x)") {
  const auto map = build_chebyshev(1, 65, DomainBox::unit(1));
  for (int i = 0; i < 1000; ++i) {
    const double x = -1.0 + 2.0 * i / 999.0;
    const VectorXd phi = map.evaluate(vec1(x));
    for (int k = 0; k <= 64; ++k)
      CHECK(std::abs(phi[k] - std::cos(k * std::acos(x))) < 1e-12);
  }
}

TEST_CASE("fourier atoms") {
  const auto map = build_fourier(1, 3, DomainBox::unit(1));
  const VectorXd phi = map.evaluate(vec1(0.0));
  REQUIRE(phi.size() == 3);
  CHECK(phi[0] == doctest::Approx(1.0));
  CHECK(phi[1] == doctest::Approx(1.0));  // cos(pi * 0)
  CHECK(phi[2] == doctest::Approx(0.0));  // sin(pi * 0)

  const VectorXd p = map.evaluate(vec1(0.25));
  CHECK(p[1] == doctest::Approx(std::cos(M_PI * 0.25)));
  CHECK(p[2] == doctest::Approx(std::sin(M_PI * 0.25)));

  CHECK(build_fourier(1, 1, DomainBox::unit(1)).evaluate(vec1(0.7))[0] ==
        doctest::Approx(1.0));
}

TEST_CASE("monomial atoms") {
  const auto map = build_monomial(1, 3, DomainBox::unit(1));
  const VectorXd phi = map.evaluate(vec1(0.5));
  CHECK(phi[0] == doctest::Approx(1.0));
  CHECK(phi[1] == doctest::Approx(0.5));
  CHECK(phi[2] == doctest::Approx(0.25));
  CHECK(build_monomial(1, 1, DomainBox::unit(1)).size() == 1);
}

TEST_CASE("indicator partition") {
  const auto dom = DomainBox::interval(0.0, 1.0);
  const auto map = build_indicator(2, dom);
  const VectorXd a = map.evaluate(vec1(0.25));
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.0));
  const VectorXd b = map.evaluate(vec1(1.0));  // last cell right-closed
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(1.0));
  CHECK(build_indicator(1, dom).evaluate(vec1(0.4))[0] == doctest::Approx(1.0));
  CHECK_THROWS(build_indicator(2, DomainBox::unit(2)));
}

TEST_CASE("feature norms bounded") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto cheb = build_chebyshev(1, 6, DomainBox::unit(1));
  const auto ind = build_indicator(4, DomainBox::unit(1));
  for (int i = 0; i < 500; ++i) {
    const VectorXd xi = vec1(u(rng));
    CHECK(cheb.evaluate(xi).norm() <= std::sqrt(6.0) + 1e-12);
    CHECK(ind.evaluate(xi).norm() == doctest::Approx(1.0));
  }
  CHECK(analytic_sup_norm_bound(cheb) == doctest::Approx(std::sqrt(6.0)));
  CHECK(analytic_sup_norm_bound(ind) == doctest::Approx(1.0));
}

TEST_CASE("sup norm estimation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> samples;
  for (int i = 0; i < 2000; ++i) samples.push_back(vec1(u(rng)));
  samples.push_back(vec1(1.0));
  samples.push_back(vec1(-1.0));

  const auto cheb = build_chebyshev(1, 4, DomainBox::unit(1));
  CHECK(estimate_sup_norm(cheb, samples) <= 2.0 + 1e-12);

  const auto ind = build_indicator(3, DomainBox::unit(1));
  CHECK(estimate_sup_norm(ind, samples) == doctest::Approx(1.0));

  const auto mono = build_monomial(1, 3, DomainBox::unit(1));
  CHECK(estimate_sup_norm(mono, samples) == doctest::Approx(std::sqrt(3.0)));

  CHECK_THROWS(estimate_sup_norm(cheb, {}));
}

TEST_CASE("min eigenvalue estimation") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> samples;
  for (int i = 0; i < 100000; ++i) samples.push_back(vec1(u(rng)));

  const auto c1 = build_chebyshev(1, 1, DomainBox::unit(1));
  CHECK(estimate_min_eigenvalue(c1, samples) == doctest::Approx(1.0));

  const auto c2 = build_chebyshev(1, 2, DomainBox::unit(1));
  CHECK(estimate_min_eigenvalue(c2, samples) == doctest::Approx(1.0 / 3.0).epsilon(0.06));
  CHECK(std::abs(estimate_min_eigenvalue(c2, samples) - 1.0 / 3.0) < 0.02);

  std::vector<VectorXd> s01;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) s01.push_back(vec1(u01(rng)));
  const auto ind = build_indicator(2, DomainBox::interval(0.0, 1.0));
  CHECK(std::abs(estimate_min_eigenvalue(ind, s01) - 0.5) < 0.02);

  CHECK_THROWS(estimate_min_eigenvalue(c2, {vec1(0.0)}));

  // empirical estimate converges to the analytic minimum eigenvalue
  for (int n = 2; n <= 8; ++n) {
    const auto map = build_chebyshev(1, n, DomainBox::unit(1));
    const MatrixXd sigma = exact_gram(n);  // E[T_i T_j] under Uniform[-1,1]
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
    const double exact = std::min(1.0, es.eigenvalues().minCoeff());
    const double est = estimate_min_eigenvalue(map, samples);
    CHECK(std::abs(est - exact) < 0.05 * exact);
  }
}

TEST_CASE("metrics clamping") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<VectorXd> samples;
  for (int i = 0; i < 5000; ++i) samples.push_back(vec1(u(rng)));
  const auto map = build_chebyshev(1, 3, DomainBox::unit(1));
  const auto m = estimate_metrics(map, samples);
  CHECK(m.sup_norm >= 1.0);
  CHECK(m.min_eig <= 1.0);
  CHECK(m.min_eig >= 0.0);
  CHECK(m.n_samples == 5000);
}

TEST_CASE("gram matrix eigenvalue lower bound") {
  const double c_b = (M_PI - 1.0) / 32.0;
  for (int n = 1; n <= 16; ++n) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(exact_gram(n));
    CHECK(es.eigenvalues().minCoeff() >= c_b / n);
  }
}

TEST_CASE("chebyshev coefficients of polynomials") {
  const auto a1 = chebyshev_coefficients([](double x) { return x; }, 2);
  CHECK(std::abs(a1[0]) < 1e-10);
  CHECK(a1[1] == doctest::Approx(1.0));
  CHECK(std::abs(a1[2]) < 1e-10);

  const auto a2 = chebyshev_coefficients([](double x) { return 2 * x * x - 1; }, 3);
  CHECK(std::abs(a2[0]) < 1e-10);
  CHECK(std::abs(a2[1]) < 1e-10);
  CHECK(a2[2] == doctest::Approx(1.0));
  CHECK(std::abs(a2[3]) < 1e-10);

  // a degree-d polynomial has vanishing coefficients above d
  const auto a3 = chebyshev_coefficients(
      [](double x) { return 3 * x * x * x - x + 0.5; }, 12);
  for (int k = 4; k <= 12; ++k) CHECK(std::abs(a3[k]) < 1e-10);

  CHECK_THROWS(chebyshev_coefficients(
      [](double) { return std::numeric_limits<double>::quiet_NaN(); }, 4));
}

TEST_CASE("chebyshev coefficients of exp match Bessel values") {
  const auto a = chebyshev_coefficients([](double x) { return std::exp(x); }, 10);
  CHECK(a[0] == doctest::Approx(std::cyl_bessel_i(0.0, 1.0)).epsilon(1e-12));
  for (int k = 1; k <= 10; ++k)
    CHECK(a[k] == doctest::Approx(2.0 * std::cyl_bessel_i(k, 1.0)).epsilon(1e-10));
}

TEST_CASE("coefficient decay and truncation residual") {
  for (const auto& f : {std::function<double(double)>([](double x) { return std::exp(x); }),
                        std::function<double(double)>([](double x) { return 1.0 / (2.0 - x); })}) {
    const auto a = chebyshev_coefficients(f, 24);
    // least-squares slope of log|a_k| over k in [2, 20]
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = 2; k <= 20; ++k) {
      const double y = std::log(std::abs(a[k]));
      sx += k;
      sy += y;
      sxx += static_cast<double>(k) * k;
      sxy += k * y;
      ++cnt;
    }
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    CHECK(slope < 0.0);
    const double rho = std::exp(-slope);
    CHECK(rho > 1.0);
    // fitted envelope |a_k| <= 2 M rho^-k
    double m_fit = 0.0;
    for (int k = 0; k <= 20; ++k)
      m_fit = std::max(m_fit, 0.5 * std::abs(a[k]) * std::pow(rho, k));
    for (int k = 0; k <= 20; ++k)
      CHECK(std::abs(a[k]) <= 2.0 * m_fit * std::pow(rho, -k) * (1.0 + 1e-12));

    // truncation residual bound on a 1000-point grid (exp only is smooth
    // enough to care; the bound is checked for both)
    for (int n : {4, 8, 12}) {
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const double x = -1.0 + 2.0 * i / 999.0;
        double approx = 0.0;
        for (int k = 0; k <= n; ++k)
          approx += a[k] * std::cos(k * std::acos(x));
        worst = std::max(worst, std::abs(f(x) - approx));
      }
      const double bound =
          m_fit * (2.0 / (rho - 1.0)) * (1.0 - (1.0 - std::pow(rho, -n)));
      CHECK(worst <= bound);
    }
  }
}

TEST_CASE("degree selection formula") {
  // worked example: eps=0.1, M=1, rho=1.5, 1-d in context and lower variable
  CHECK(chebyshev_degree_for_tolerance(0.1, 1.0, 1.5, 1, 1) == 10);

  // monotone: doubling the tolerance never increases the count
  long prev = -1;
  for (double eps : {0.025, 0.05, 0.1, 0.2, 0.4}) {
    const long n = chebyshev_degree_for_tolerance(eps, 1.0, 1.5, 1, 1);
    if (prev >= 0) CHECK(n <= prev);
    prev = n;
  }

  // tensor count is a perfect square in two context dimensions
  const long n2 = chebyshev_degree_for_tolerance(0.05, 1.0, 1.4, 2, 1);
  const long root = std::lround(std::sqrt(static_cast<double>(n2)));
  CHECK(root * root == n2);

  CHECK_THROWS(chebyshev_degree_for_tolerance(0.1, 1.0, 3.0, 1, 1));  // rho too big
  CHECK_THROWS(chebyshev_degree_for_tolerance(1e9, 1.0, 1.5, 1, 1));  // infeasible
}

TEST_CASE("domain box validation") {
  CHECK_THROWS(DomainBox(vec1(1.0), vec1(0.0)));
  const auto dom = DomainBox::interval(-2.0, 2.0);
  CHECK(dom.contains(vec1(2.0)));
  CHECK(!dom.contains(vec1(2.1)));
  CHECK(dom.rescale(vec1(1.0))[0] == doctest::Approx(0.5));
}
