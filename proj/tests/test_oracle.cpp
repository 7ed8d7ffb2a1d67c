#include <cmath>
#include <random>

#include "csbo/oracle.hpp"
#include "csbo/quadratic.hpp"
#include "csbo/traffic.hpp"
#include "doctest.h"

using namespace csbo;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using problem::JointSample;

TEST_CASE("solve_lower_exact uses the closed form when available") {
  problem::QuadraticProblem p(3, 3, 101);
  VectorXd x = VectorXd::Random(3), xi(1);
  xi << 0.4;
  const VectorXd y = oracle::solve_lower_exact(p, x, xi, 1e-10);
  CHECK((y - p.y_star(x, xi)).norm() == 0.0);
  CHECK(p.lower_grad(x, y, xi).norm() < 1e-10);
}

TEST_CASE("solve_lower_exact descends the traffic objective") {
  problem::TrafficProblem::Params tp;
  tp.n_train = 1;
  tp.n_test = 0;
  problem::TrafficProblem tr(102, tp);
  VectorXd x(2), xi(1);
  x << 0.6, 0.4;
  xi << 0.7;
  const VectorXd y = oracle::solve_lower_exact(tr, x, xi, 1e-9);
  CHECK(tr.lower_grad(x, y, xi).norm() <= 1e-9);
  // agrees with the problem's own equilibrium solver
  CHECK((y - tr.solve_flow(x, xi, 1e-9)).norm() < 1e-6);
}

TEST_CASE("exact hypergradient matches finite differences of the upper loss") {
  const double h = 1e-5;

  problem::QuadraticProblem quad(3, 2, 103);
  const auto qs = quad.sample_joint(25, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = g(rng);
    const VectorXd grad = oracle::exact_hypergradient(quad, x, qs, 1e-11);
    const VectorXd fd = oracle::finite_diff_gradient(
        [&](const VectorXd& z) {
          return oracle::empirical_upper_objective(quad, z, qs, 1e-11);
        },
        x, h);
    CHECK((grad - fd).norm() / std::max(1.0, fd.norm()) < 1e-3);
    // closed-form cross-check specific to this instance
    CHECK((grad - quad.exact_gradient(x, qs)).norm() /
              std::max(1.0, grad.norm()) <
          1e-8);
  }

  problem::TrafficProblem::Params tp;
  tp.n_train = 5;
  tp.n_test = 0;
  problem::TrafficProblem tr(104, tp);
  std::uniform_real_distribution<double> u(0.3, 0.9);
  for (int t = 0; t < 10; ++t) {
    VectorXd x(2);
    x << u(rng), u(rng);
    const VectorXd grad = oracle::exact_hypergradient(tr, x, tr.train(), 1e-10);
    const VectorXd fd = oracle::finite_diff_gradient(
        [&](const VectorXd& z) {
          return oracle::empirical_upper_objective(tr, z, tr.train(), 1e-12);
        },
        x, h);
    CHECK((grad - fd).norm() / std::max(1.0, fd.norm()) < 1e-3);
  }
}

TEST_CASE("reduced exact solve recovers the closed-form minimizer") {
  problem::QuadraticProblem p(2, 3, 105);
  const auto samples = p.sample_joint(100, 3);
  const VectorXd x = VectorXd::Random(2);

  // one-atom basis: the empirical minimizer is Q^{-1} mean(Ax + b + eta)
  const auto c1 = basis::build_chebyshev(1, 1, p.domain());
  reduction::ReducedSbo red1(p, c1);
  const MatrixXd W1 = oracle::solve_reduced_lower_exact(red1, x, samples, 1e-10);
  CHECK((W1 - p.reduced_w_star(c1, samples, x)).norm() < 1e-8);

  // nested bases: the empirical reduced risk is non-increasing in N
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 2, 4}) {
    const auto map = basis::build_chebyshev(1, n, p.domain());
    reduction::ReducedSbo red(p, map);
    const MatrixXd W = oracle::solve_reduced_lower_exact(red, x, samples, 1e-9);
    double risk = 0.0;
    for (const auto& s : samples) risk += red.g_value(x, W, s);
    risk /= double(samples.size());
    CHECK(risk <= prev + 1e-10);
    prev = risk;
  }
}

TEST_CASE("reduced hypergradient at W* matches the analytic value") {
  problem::QuadraticProblem p(3, 2, 107);
  const auto samples = p.sample_joint(40, 5);
  const auto map = basis::build_chebyshev(1, 3, p.domain());
  reduction::ReducedSbo red(p, map);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    VectorXd x(3);
    for (int i = 0; i < 3; ++i) x[i] = g(rng);
    const MatrixXd Wstar = p.reduced_w_star(map, samples, x);
    const VectorXd got = oracle::exact_reduced_hypergradient(red, x, Wstar, samples);
    const VectorXd want = p.analytic_reduced_gradient(map, samples, x);
    CHECK((got - want).norm() / std::max(1.0, want.norm()) < 1e-8);
  }
}

TEST_CASE("reduced hypergradient refuses oversized dense systems") {
  problem::QuadraticProblem p(2, 2, 108);
  const auto map = basis::build_chebyshev(1, 300, p.domain());
  reduction::ReducedSbo red(p, map);
  const auto samples = p.sample_joint(2, 7);
  CHECK_THROWS(oracle::exact_reduced_hypergradient(
      red, VectorXd::Zero(2), MatrixXd::Zero(2, 300), samples));
}

TEST_CASE("finite difference oracle") {
  // quadratic field: exact up to rounding
  const VectorXd point = (VectorXd(2) << 0.3, -0.7).finished();
  const VectorXd fd = oracle::finite_diff_gradient(
      [](const VectorXd& z) { return z[0] * z[0] + 2.0 * z[0] * z[1]; }, point,
      1e-6);
  VectorXd want(2);
  want << 2 * 0.3 + 2 * (-0.7), 2 * 0.3;
  CHECK((fd - want).norm() < 1e-8);

  CHECK_THROWS(oracle::finite_diff_gradient(
      [](const VectorXd&) { return std::numeric_limits<double>::quiet_NaN(); },
      point, 1e-6));
}

TEST_CASE("least-squares projection reproduces representable solutions") {
  problem::QuadraticProblem p(2, 2, 109);
  const auto samples = p.sample_joint(60, 8);
  const VectorXd x = VectorXd::Random(2);

  // y*(x, xi) = Q^{-1}(Ax + b(xi) + m(xi) 1) involves sin(omega xi) and xi;
  // a rich Chebyshev basis should represent it almost exactly
  const auto map = basis::build_chebyshev(1, 14, p.domain());
  const MatrixXd W = oracle::least_squares_projection(p, map, x, samples, 1e-11);
  double resid = 0.0;
  for (const auto& s : samples) {
    const VectorXd y = p.y_star(x, s.xi);
    resid = std::max(resid, (W * map.evaluate(s.xi) - y).norm());
  }
  CHECK(resid < 1e-6);

  // indicator projection is the per-cell conditional mean of y*
  const auto ind = basis::build_indicator(3, p.domain());
  const MatrixXd Wi = oracle::least_squares_projection(p, ind, x, samples, 1e-11);
  for (int cell = 0; cell < 3; ++cell) {
    VectorXd mean = VectorXd::Zero(2);
    int count = 0;
    for (const auto& s : samples)
      if (ind.indicator_cell(s.xi[0]) == cell) {
        mean += p.y_star(x, s.xi);
        ++count;
      }
    if (count == 0) continue;
    mean /= double(count);
    CHECK((Wi.col(cell) - mean).norm() < 1e-9);
  }
}
