#include "hom/fits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "hom/errors.hpp"

namespace hom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// sin^2 phase per ps and per ueV: FSS [ueV] / (2 hbar) * 1e-3.
constexpr double kPhasePerPsUeV = 1e-3 / (2.0 * kHbarMicroEvNs);

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

struct Sorted {
  std::vector<double> x;
  std::vector<double> y;
};

Sorted sorted_by_x(std::span<const double> x, std::span<const double> y) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  Sorted s;
  for (auto i : idx) {
    s.x.push_back(x[i]);
    s.y.push_back(y[i]);
  }
  return s;
}

// Slope of log(y - background) against t over the decaying part after the peak.
double log_linear_lifetime(const Sorted& d, std::size_t peak, double background) {
  const double height = d.y[peak] - background;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = peak; i < d.x.size(); ++i) {
    const double v = d.y[i] - background;
    if (v <= 0.05 * height) continue;
    const double ly = std::log(v);
    sx += d.x[i];
    sy += ly;
    sxx += d.x[i] * d.x[i];
    sxy += d.x[i] * ly;
    ++n;
  }
  if (n < 2) throw EstimationError("too few decaying points for a lifetime estimate");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (!(slope < 0.0)) throw EstimationError("trace does not decay");
  return -1.0 / slope;
}

double beating_shape(double u_ps, double t1_ps, double fss_ueV) {
  if (u_ps < 0.0) return 0.0;
  const double s = std::sin(kPhasePerPsUeV * fss_ueV * u_ps);
  return s * s * std::exp(-u_ps / t1_ps);
}

// Linear least squares of y = A * shape + B; returns the sum of squared errors.
double linear_amplitude_fit(const Sorted& d, const std::vector<double>& shape, double& a, double& b) {
  const double n = static_cast<double>(shape.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    sx += shape[i];
    sy += d.y[i];
    sxx += shape[i] * shape[i];
    sxy += shape[i] * d.y[i];
  }
  const double det = n * sxx - sx * sx;
  a = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
  b = (sy - a * sx) / n;
  double sse = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const double e = d.y[i] - a * shape[i] - b;
    sse += e * e;
  }
  return sse;
}

std::vector<ParameterSpec> lifetime_initial_guess(const Sorted& d, LifetimeModel model, double background) {
  const auto peak = static_cast<std::size_t>(std::max_element(d.y.begin(), d.y.end()) - d.y.begin());
  const double height = d.y[peak] - background;
  if (!(height > 0.0)) throw EstimationError("trace has no signal above background");
  const double t1 = log_linear_lifetime(d, peak, background);
  const double span = d.x.back() - d.x.front();
  if (model == LifetimeModel::MonoExp) {
    return {{"t1_ps", t1, 1e-6 * span, kInf},
            {"amplitude", height, 0.0, kInf},
            {"background", background, -kInf, kInf}};
  }

  std::size_t first = 0;
  while (first < d.y.size() && d.y[first] - background < 0.02 * height) ++first;
  const double t0 = first > 0 ? d.x[first - 1] : d.x.front();

  // First minimum after the peak of a 5-point moving average.
  auto smooth = [&](std::size_t i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(i + 3, d.y.size());
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += d.y[k];
    return s / static_cast<double>(hi - lo);
  };
  double fss = 0.0;
  for (std::size_t i = peak + 1; i + 1 < d.y.size(); ++i) {
    if (smooth(i) <= smooth(i - 1) && smooth(i) < smooth(i + 1)) {
      fss = kPi / (kPhasePerPsUeV * (d.x[i] - t0));
      break;
    }
  }
  if (!(fss > 0.0)) fss = kPi / (kPhasePerPsUeV * span);

  // Refine the splitting on a coarse scan with linear amplitude/background.
  double best_sse = kInf, best_fss = fss, amp = height, bg = background;
  std::vector<double> shape(d.x.size());
  for (int k = -30; k <= 30; ++k) {
    const double candidate = fss * (1.0 + 0.01 * k);
    for (std::size_t i = 0; i < d.x.size(); ++i) shape[i] = beating_shape(d.x[i] - t0, t1, candidate);
    double a = 0.0, b = 0.0;
    const double sse = linear_amplitude_fit(d, shape, a, b);
    if (a > 0.0 && sse < best_sse) {
      best_sse = sse;
      best_fss = candidate;
      amp = a;
      bg = b;
    }
  }
  return {{"t1_ps", t1, 1e-6 * span, kInf},
          {"fss_ueV", best_fss, 0.0, kInf},
          {"amplitude", amp, 0.0, kInf},
          {"t0_ps", t0, d.x.front() - span, d.x.back()},
          {"background", bg, -kInf, kInf}};
}

}  // namespace

void LifetimeTrace::validate() const {
  if (time_ps.size() != counts.size()) throw DomainError("time and counts lengths differ");
  for (double c : counts) {
    if (!(c >= 0.0)) throw DomainError("counts must be non-negative");
  }
}

std::vector<std::string> lifetime_parameter_names(LifetimeModel model) {
  if (model == LifetimeModel::MonoExp) return {"t1_ps", "amplitude", "background"};
  return {"t1_ps", "fss_ueV", "amplitude", "t0_ps", "background"};
}

CurveModel lifetime_curve(std::span<const double> time_ps, LifetimeModel model) {
  CurveModel m;
  m.n_obs = time_ps.size();
  auto t = std::make_shared<std::vector<double>>(to_vector(time_ps));
  if (model == LifetimeModel::MonoExp) {
    m.predict = [t](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
      out.resize(static_cast<Eigen::Index>(t->size()));
      for (std::size_t i = 0; i < t->size(); ++i) {
        const double ti = (*t)[i];
        out(static_cast<Eigen::Index>(i)) = (ti >= 0.0 ? p(1) * std::exp(-ti / p(0)) : 0.0) + p(2);
      }
    };
    m.jacobian = [t](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
      jac.resize(static_cast<Eigen::Index>(t->size()), 3);
      for (std::size_t i = 0; i < t->size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double ti = (*t)[i];
        const double e = ti >= 0.0 ? std::exp(-ti / p(0)) : 0.0;
        jac(r, 0) = p(1) * e * ti / (p(0) * p(0));
        jac(r, 1) = e;
        jac(r, 2) = 1.0;
      }
    };
    return m;
  }
  m.predict = [t](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(t->size()));
    for (std::size_t i = 0; i < t->size(); ++i) {
      out(static_cast<Eigen::Index>(i)) = p(2) * beating_shape((*t)[i] - p(3), p(0), p(1)) + p(4);
    }
  };
  m.jacobian = [t](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    jac.resize(static_cast<Eigen::Index>(t->size()), 5);
    const double t1 = p(0);
    const double k = kPhasePerPsUeV * p(1);
    for (std::size_t i = 0; i < t->size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double u = (*t)[i] - p(3);
      if (u < 0.0) {
        jac.row(r) << 0.0, 0.0, 0.0, 0.0, 1.0;
        continue;
      }
      const double s = std::sin(k * u);
      const double e = std::exp(-u / t1);
      const double s2 = s * s;
      const double sin2 = std::sin(2.0 * k * u);
      jac(r, 0) = p(2) * s2 * e * u / (t1 * t1);
      jac(r, 1) = p(2) * e * sin2 * u * kPhasePerPsUeV;
      jac(r, 2) = s2 * e;
      jac(r, 3) = -p(2) * e * (k * sin2 - s2 / t1);
      jac(r, 4) = 1.0;
    }
  };
  return m;
}

FitResult fit_lifetime(const LifetimeTrace& trace, LifetimeModel model, const LeastSquaresOptions& options) {
  trace.validate();
  if (trace.time_ps.size() < 100) throw EstimationError("lifetime fit needs at least 100 points");
  const Sorted d = sorted_by_x(trace.time_ps, trace.counts);
  const auto init = lifetime_initial_guess(d, model, trace.background);
  if (d.x.back() - d.x.front() < 3.0 * init[0].initial) {
    throw EstimationError("trace spans fewer than 3 lifetimes");
  }
  return least_squares(lifetime_curve(d.x, model), d.y, {}, init, options);
}

CurveModel reflectivity_curve(std::span<const double> wavelength_nm) {
  CurveModel m;
  m.n_obs = wavelength_nm.size();
  auto x = std::make_shared<std::vector<double>>(to_vector(wavelength_nm));
  m.predict = [x](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(x->size()));
    const double hw = 0.5 * p(1);
    for (std::size_t i = 0; i < x->size(); ++i) {
      const double d = (*x)[i] - p(0);
      out(static_cast<Eigen::Index>(i)) = p(3) - p(2) * hw * hw / (d * d + hw * hw);
    }
  };
  m.jacobian = [x](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    jac.resize(static_cast<Eigen::Index>(x->size()), 4);
    const double hw = 0.5 * p(1);
    for (std::size_t i = 0; i < x->size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double d = (*x)[i] - p(0);
      const double q = d * d + hw * hw;
      jac(r, 0) = -p(2) * 2.0 * d * hw * hw / (q * q);
      jac(r, 1) = -p(2) * hw * d * d / (q * q);
      jac(r, 2) = -hw * hw / q;
      jac(r, 3) = 1.0;
    }
  };
  return m;
}

FitResult fit_reflectivity(const ReflectivitySpectrum& spectrum, const LeastSquaresOptions& options) {
  if (spectrum.wavelength_nm.size() != spectrum.reflectivity.size()) {
    throw DomainError("wavelength and reflectivity lengths differ");
  }
  if (spectrum.wavelength_nm.size() < 8) throw EstimationError("reflectivity fit needs at least 8 points");
  const Sorted d = sorted_by_x(spectrum.wavelength_nm, spectrum.reflectivity);
  const std::size_t n = d.x.size();
  const auto imin = static_cast<std::size_t>(std::min_element(d.y.begin(), d.y.end()) - d.y.begin());
  const std::size_t edge = std::max<std::size_t>(n / 20, 1);
  double baseline = 0.0;
  for (std::size_t i = 0; i < edge; ++i) baseline += d.y[i] + d.y[n - 1 - i];
  baseline /= static_cast<double>(2 * edge);
  const double depth = baseline - d.y[imin];
  if (!(depth > 0.0)) throw EstimationError("spectrum shows no dip");
  const double half = baseline - 0.5 * depth;
  std::size_t left = imin, right = imin;
  while (left > 0 && d.y[left] < half) --left;
  while (right + 1 < n && d.y[right] < half) ++right;
  const double step = (d.x.back() - d.x.front()) / static_cast<double>(n - 1);
  const double fwhm = std::max(d.x[right] - d.x[left], 2.0 * step);
  const double span = d.x.back() - d.x.front();
  if (span < 3.0 * fwhm) throw EstimationError("spectrum covers fewer than 3 linewidths");

  const std::vector<ParameterSpec> init{{"x_c_nm", d.x[imin], d.x.front(), d.x.back()},
                                        {"fwhm_nm", fwhm, 1e-9 * span, span},
                                        {"depth", depth, 0.0, kInf},
                                        {"baseline", baseline, -kInf, kInf}};
  FitResult fit = least_squares(reflectivity_curve(d.x), d.y, {}, init, options);
  const double xc = fit.params[0];
  const double w = fit.params[1];
  const double dq_dx = 1.0 / w;
  const double dq_dw = -xc / (w * w);
  const double var = dq_dx * dq_dx * fit.covariance(0, 0) + dq_dw * dq_dw * fit.covariance(1, 1) +
                     2.0 * dq_dx * dq_dw * fit.covariance(0, 1);
  fit.names.push_back("q");
  fit.params.push_back(xc / w);
  fit.sigmas.push_back(std::sqrt(std::max(var, 0.0)));
  return fit;
}

CurveModel delay_visibility_curve(std::span<const double> filtered_delays_ns,
                                  std::span<const double> unfiltered_delays_ns, Rate gamma) {
  CurveModel m;
  const std::size_t nf = filtered_delays_ns.size();
  m.n_obs = nf + unfiltered_delays_ns.size();
  auto delays = std::make_shared<std::vector<double>>(to_vector(filtered_delays_ns));
  delays->insert(delays->end(), unfiltered_delays_ns.begin(), unfiltered_delays_ns.end());
  const double g = gamma.per_ns;
  m.predict = [delays, nf, g](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(delays->size()));
    const double width = g + p(0);
    for (std::size_t i = 0; i < delays->size(); ++i) {
      const double dw = i < nf ? p(1) : p(2);
      out(static_cast<Eigen::Index>(i)) = visibility_vs_delay(g / width, dw / width, p(3), (*delays)[i]);
    }
  };
  m.jacobian = [delays, nf, g](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    jac.setZero(static_cast<Eigen::Index>(delays->size()), 4);
    const double width = g + p(0);
    const double v0 = g / width;
    for (std::size_t i = 0; i < delays->size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const bool filtered = i < nf;
      const double dw = filtered ? p(1) : p(2);
      const double ratio = dw / width;
      const double decay = std::exp(-(*delays)[i] / p(3));
      const double e = 1.0 - decay;
      const double q = 1.0 + 2.0 * ratio * ratio * e;
      jac(r, 0) = -g / (width * width * q) + v0 * 4.0 * e * ratio * ratio / (width * q * q);
      jac(r, filtered ? 1 : 2) = -v0 / (q * q) * 4.0 * e * ratio / width;
      jac(r, 3) = v0 / (q * q) * 2.0 * ratio * ratio * decay * (*delays)[i] / (p(3) * p(3));
    }
  };
  return m;
}

FitResult fit_delay_visibility(const DelayVisibilitySeries& filtered, const DelayVisibilitySeries& unfiltered,
                               Rate gamma, const DelayFitOptions& options) {
  filtered.validate();
  unfiltered.validate();
  if (filtered.entries.size() < 3 || unfiltered.entries.size() < 3) {
    throw EstimationError("each delay series needs at least 3 points");
  }
  if (!(gamma.per_ns > 0.0)) throw DomainError("radiative rate must be positive");

  std::vector<double> df, du, obs, sig;
  std::size_t weighted = 0;
  auto collect = [&](const DelayVisibilitySeries& s, std::vector<double>& delays) {
    for (const auto& e : s.entries) {
      delays.push_back(e.delay_ns);
      obs.push_back(e.visibility);
      const double sv = e.inflate_uncertainty ? options.outlier_sigma : e.sigma_v;
      sig.push_back(sv);
      if (sv > 0.0) ++weighted;
    }
  };
  collect(filtered, df);
  collect(unfiltered, du);
  if (weighted != 0 && weighted != sig.size()) {
    throw DomainError("either all or none of the delay points must carry uncertainties");
  }
  if (weighted == 0) sig.clear();

  // V(0) from the best point; wandering from the endpoint drop at tau_c = 1000 ns.
  constexpr double kTauStart = 1000.0;
  const double v0 = std::min(*std::max_element(obs.begin(), obs.end()), 0.999);
  const double gamma_star = gamma.per_ns * (1.0 / v0 - 1.0);
  const double width = gamma.per_ns + gamma_star;
  auto wandering_guess = [&](const DelayVisibilitySeries& s) {
    const auto& last = s.entries.back();
    const double e = 1.0 - std::exp(-last.delay_ns / kTauStart);
    const double r2 = (v0 / std::max(last.visibility, 1e-6) - 1.0) / (2.0 * e);
    return std::max(std::sqrt(std::max(r2, 0.0)) * width, 1e-3 * gamma.per_ns);
  };
  const std::vector<ParameterSpec> init{{"gamma_star", gamma_star, 0.0, kInf},
                                        {"delta_omega_filtered", wandering_guess(filtered), 0.0, kInf},
                                        {"delta_omega_unfiltered", wandering_guess(unfiltered), 0.0, kInf},
                                        {"tau_c_ns", kTauStart, 1e-6, kInf}};
  FitResult fit = least_squares(delay_visibility_curve(df, du, gamma), obs, sig, init, options.solver);
  const double w = gamma.per_ns + fit.params[0];
  fit.names.push_back("v0");
  fit.params.push_back(gamma.per_ns / w);
  fit.sigmas.push_back(gamma.per_ns / (w * w) * fit.sigmas[0]);
  return fit;
}

}  // namespace hom
