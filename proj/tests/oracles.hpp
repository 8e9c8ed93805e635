#pragma once

// Reference computations used only by tests: independent of the library's
// own numerics.

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "hom/least_squares.hpp"

namespace oracle {

inline double adaptive_simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Lorentzian (HWHM g) convolved with a Gaussian (std s) at x, by quadrature in
/// the Gaussian variable after splitting the range around the Lorentzian peak.
inline double voigt_convolution(double x, double g, double s) {
  const double inv = 1.0 / (s * std::sqrt(2.0 * M_PI));
  auto integrand = [&](double u) {
    const double d = x - u;
    return inv * std::exp(-u * u / (2.0 * s * s)) * g / (M_PI * (g * g + d * d));
  };
  const double lim = 12.0 * s;
  double lo = -lim;
  double hi = lim;
  if (x <= lo || x >= hi) return integrate(integrand, lo, hi, 1e-15);
  // Refine around the Lorentzian peak at u = x.
  const double w = std::min(50.0 * g, 0.5 * (hi - lo));
  const double a = std::max(lo, x - w);
  const double b = std::min(hi, x + w);
  double sum = integrate(integrand, a, b, 1e-15);
  if (a > lo) sum += integrate(integrand, lo, a, 1e-15);
  if (b < hi) sum += integrate(integrand, b, hi, 1e-15);
  return sum;
}

/// Central finite-difference Jacobian with relative step h.
inline Eigen::MatrixXd central_difference(const hom::CurveModel& m, const Eigen::VectorXd& p, double h) {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(m.n_obs), p.size());
  Eigen::VectorXd plus(static_cast<Eigen::Index>(m.n_obs));
  Eigen::VectorXd minus(static_cast<Eigen::Index>(m.n_obs));
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(p[k]));
    Eigen::VectorXd q = p;
    q[k] = p[k] + step;
    m.predict(q, plus);
    q[k] = p[k] - step;
    m.predict(q, minus);
    jac.col(k) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

/// Central differences at steps h and h/2 combined by Richardson
/// extrapolation, cancelling the O(h^2) truncation term.
inline Eigen::MatrixXd finite_difference_jacobian(const hom::CurveModel& m, const Eigen::VectorXd& p,
                                                  double h = 1e-6) {
  return (4.0 * central_difference(m, p, 0.5 * h) - central_difference(m, p, h)) / 3.0;
}

/// Largest column-wise relative mismatch between analytic and numeric Jacobians.
inline double jacobian_mismatch(const hom::CurveModel& m, const Eigen::VectorXd& p) {
  Eigen::MatrixXd analytic(static_cast<Eigen::Index>(m.n_obs), p.size());
  m.jacobian(p, analytic);
  const Eigen::MatrixXd numeric = finite_difference_jacobian(m, p);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double scale = std::max(numeric.col(k).norm(), 1e-300);
    worst = std::max(worst, (analytic.col(k) - numeric.col(k)).norm() / scale);
  }
  return worst;
}

}  // namespace oracle
