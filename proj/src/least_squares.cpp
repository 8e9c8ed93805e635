#include "hom/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hom/errors.hpp"

namespace hom {

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kZeroResidual = 1e-12;

Eigen::VectorXd clamp_to(const Eigen::VectorXd& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

// Rank of the Jacobian after normalizing every column.
Eigen::Index scaled_rank(const Eigen::MatrixXd& jac) {
  Eigen::MatrixXd scaled = jac;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
    const double n = scaled.col(j).norm();
    if (n == 0.0) return 0;
    scaled.col(j) /= n;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(kRankTolerance);
  return qr.rank();
}

}  // namespace

double FitResult::value(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no fit parameter named " + name);
  return params[static_cast<std::size_t>(it - names.begin())];
}

double FitResult::sigma(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no fit parameter named " + name);
  return sigmas[static_cast<std::size_t>(it - names.begin())];
}

FitResult least_squares(const CurveModel& model, std::span<const double> observed,
                        std::span<const double> sigma, const std::vector<ParameterSpec>& init,
                        const LeastSquaresOptions& options) {
  const auto n = static_cast<Eigen::Index>(model.n_obs);
  const auto np = static_cast<Eigen::Index>(init.size());
  if (observed.size() != model.n_obs) throw DomainError("observation count does not match the model");
  if (!sigma.empty() && sigma.size() != model.n_obs) throw DomainError("sigma count does not match the model");
  if (np == 0) throw DomainError("no parameters to fit");
  if (n < np) throw EstimationError("fewer observations than parameters");

  Eigen::VectorXd p(np), lo(np), hi(np);
  for (Eigen::Index j = 0; j < np; ++j) {
    const auto& spec = init[static_cast<std::size_t>(j)];
    if (!(spec.lower <= spec.initial && spec.initial <= spec.upper)) {
      throw DomainError("initial value of " + spec.name + " lies outside its bounds");
    }
    p(j) = spec.initial;
    lo(j) = spec.lower;
    hi(j) = spec.upper;
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(observed.data(), n);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!sigma.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(sigma[static_cast<std::size_t>(i)] > 0.0)) throw DomainError("uncertainties must be positive");
      w(i) = 1.0 / sigma[static_cast<std::size_t>(i)];
    }
  }
  const double data_scale = std::max(w.cwiseProduct(y).norm(), 1e-300);

  Eigen::VectorXd f(n);
  Eigen::MatrixXd jac(n, np);
  auto residual = [&](const Eigen::VectorXd& params, Eigen::VectorXd& r) {
    model.predict(params, f);
    r = w.cwiseProduct(y - f);
    return 0.5 * r.squaredNorm();
  };
  auto weighted_jacobian = [&](const Eigen::VectorXd& params) {
    model.jacobian(params, jac);
    return Eigen::MatrixXd(w.asDiagonal() * jac);
  };

  Eigen::VectorXd r(n);
  double cost = residual(p, r);
  Eigen::MatrixXd jw = weighted_jacobian(p);
  if (!jw.allFinite() || !r.allFinite()) throw EstimationError("model is not finite at the initial point");
  if (scaled_rank(jw) < np) throw RankDeficientError("Jacobian is rank deficient at the initial point");

  FitResult out;
  double lambda = 1e-8;
  double nu = 2.0;
  std::ostringstream diag;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    out.n_iter = iter;
    const Eigen::VectorXd g = jw.transpose() * r;
    const double rnorm = r.norm();
    if (rnorm <= kZeroResidual * data_scale) {
      out.converged = true;
      diag << "zero residual";
      break;
    }
    double worst_cos = 0.0;
    for (Eigen::Index j = 0; j < np; ++j) {
      const double cn = jw.col(j).norm();
      if (cn > 0.0) worst_cos = std::max(worst_cos, std::abs(g(j)) / (cn * rnorm));
    }
    if (worst_cos <= options.gradient_tolerance) {
      out.converged = true;
      diag << "gradient tolerance";
      break;
    }

    const Eigen::MatrixXd a = jw.transpose() * jw;
    Eigen::VectorXd d = a.diagonal().cwiseMax(1e-300);
    bool accepted = false;
    bool tiny_step = false;
    while (!accepted) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * d;
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      const Eigen::VectorXd trial = clamp_to(p + step, lo, hi);
      const Eigen::VectorXd taken = trial - p;
      Eigen::VectorXd r_trial(n);
      const double cost_trial = residual(trial, r_trial);
      const double predicted = taken.dot(g) - 0.5 * taken.dot(a * taken);
      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double rho = predicted > 0.0 ? (cost - cost_trial) / predicted : 1.0;
        lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        tiny_step = taken.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance);
        p = trial;
        r = r_trial;
        cost = cost_trial;
        accepted = true;
      } else {
        if (taken.norm() <= options.step_tolerance * (p.norm() + options.step_tolerance)) {
          tiny_step = true;
          break;
        }
        lambda *= nu;
        nu *= 2.0;
        if (lambda > 1e20) break;
      }
    }
    if (tiny_step) {
      out.converged = true;
      out.n_iter = iter + 1;
      diag << "step tolerance";
      break;
    }
    if (!accepted) {
      diag << "damping diverged";
      out.n_iter = iter + 1;
      break;
    }
    jw = weighted_jacobian(p);
    out.n_iter = iter + 1;
  }
  if (!out.converged && diag.str().empty()) diag << "iteration limit reached";

  // Covariance through the SVD of the weighted Jacobian at the optimum.
  jw = weighted_jacobian(p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jw, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const auto& v = svd.matrixV();
  const double cutoff = sv.size() ? sv(0) * 1e-10 : 0.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(np, np);
  std::vector<bool> unidentified(static_cast<std::size_t>(np), false);
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff) {
      cov += v.col(k) * v.col(k).transpose() / (sv(k) * sv(k));
    } else {
      for (Eigen::Index j = 0; j < np; ++j) {
        if (std::abs(v(j, k)) > 1e-8) unidentified[static_cast<std::size_t>(j)] = true;
      }
    }
  }
  if (sigma.empty()) {
    const double dof = static_cast<double>(n - np);
    cov *= dof > 0.0 ? 2.0 * cost / dof : 1.0;
  }

  out.covariance = cov;
  out.residual_norm = std::sqrt(2.0 * cost);
  out.diagnostics = diag.str();
  for (Eigen::Index j = 0; j < np; ++j) {
    out.names.push_back(init[static_cast<std::size_t>(j)].name);
    out.params.push_back(p(j));
    out.sigmas.push_back(unidentified[static_cast<std::size_t>(j)] ? std::numeric_limits<double>::infinity()
                                                                   : std::sqrt(std::max(cov(j, j), 0.0)));
  }
  return out;
}

}  // namespace hom
