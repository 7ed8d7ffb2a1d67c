#include "csbo/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csbo::problem {

double expressiveness_constant(double L_f0, double L_f1, double L_g1,
                               double L_g2, double mu) {
  if (mu <= 0) throw std::invalid_argument("expressiveness_constant: mu must be > 0");
  return L_f1 + L_g2 * L_f0 / mu + L_g2 * L_g1 * L_f0 / (mu * mu) +
         L_f1 * L_g1 / mu;
}

VectorXd minimize_lower(const CsboProblem& prob, const VectorXd& x,
                        const VectorXd& xi, double tol, const VectorXd& y0,
                        long max_iters) {
  if (tol <= 0) throw std::invalid_argument("minimize_lower: tol must be > 0");
  VectorXd y = y0;
  double val = prob.lower_value(x, y, xi);
  double step = 1.0;
  // Once objective improvements drop below double resolution the Armijo test
  // accepts zero-progress steps; from that point the line search backtracks
  // on the gradient norm instead.
  bool gn_mode = false;
  for (long it = 0; it < max_iters; ++it) {
    const VectorXd g = prob.lower_grad(x, y, xi);
    const double gn = g.norm();
    if (!std::isfinite(gn)) throw std::runtime_error("minimize_lower: non-finite gradient");
    if (gn <= tol) return y;
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    if (!gn_mode) {
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                           (1.0 + std::abs(val));
      while (step >= 1e-18) {
        const double required = 0.5 * step * gn * gn;
        if (required < floor) break;  // progress no longer resolvable
        const VectorXd y_try = y - step * g;
        const double v_try = prob.lower_value(x, y_try, xi);
        if (std::isfinite(v_try) && v_try <= val - required) {
          y = y_try;
          val = v_try;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        gn_mode = true;
        step = 1.0;
      }
    }
    if (gn_mode) {
      while (step >= 1e-18) {
        const VectorXd y_try = y - step * g;
        const double gn_try = prob.lower_grad(x, y_try, xi).norm();
        if (std::isfinite(gn_try) && gn_try < gn) {
          y = y_try;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) throw std::runtime_error("minimize_lower: line search failed");
  }
  throw std::runtime_error("minimize_lower: iteration cap exceeded before reaching tol");
}

}  // namespace csbo::problem
