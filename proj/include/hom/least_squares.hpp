#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hom {

struct ParameterSpec {
  std::string name;
  double initial = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// A model evaluated at a fixed set of observations: predict() fills one
/// value per observation, jacobian() the n_obs x n_params derivative matrix.
struct CurveModel {
  std::size_t n_obs = 0;
  std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& out)> predict;
  std::function<void(const Eigen::VectorXd& params, Eigen::MatrixXd& jac)> jacobian;
};

struct LeastSquaresOptions {
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-14;
  int max_iterations = 500;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> sigmas;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  bool converged = false;
  int n_iter = 0;
  std::string diagnostics;

  double value(const std::string& name) const;
  double sigma(const std::string& name) const;
};

/// Weighted Levenberg-Marquardt with box bounds (trial points are clamped).
///
/// `sigma` may be empty for an unweighted fit; the covariance is then scaled
/// by the residual variance. Convergence is declared when every Jacobian
/// column is orthogonal to the weighted residual to within
/// `gradient_tolerance` (cosine measure) or the step becomes negligible.
/// Throws RankDeficientError when the Jacobian at the initial point is
/// singular. Parameters outside the column space at the optimum get an
/// infinite sigma.
FitResult least_squares(const CurveModel& model, std::span<const double> observed,
                        std::span<const double> sigma, const std::vector<ParameterSpec>& init,
                        const LeastSquaresOptions& options = {});

}  // namespace hom
