#pragma once

#include <span>
#include <string>
#include <vector>

#include "hom/least_squares.hpp"
#include "hom/spectral_noise.hpp"
#include "hom/units.hpp"

namespace hom {

struct LifetimeTrace {
  std::vector<double> time_ps;
  std::vector<double> counts;
  double background = 0.0;

  void validate() const;
};

enum class LifetimeModel { MonoExp, FssBeating };

/// MonoExp: A exp(-t/T1) + B for t >= 0, params {t1_ps, amplitude, background}.
/// FssBeating: A sin^2(FSS (t - t0) / 2 hbar) exp(-(t - t0)/T1) + B for t >= t0,
/// params {t1_ps, fss_ueV, amplitude, t0_ps, background}. The amplitude carries
/// the sin^2(2 theta) factor; theta is not separable from it.
CurveModel lifetime_curve(std::span<const double> time_ps, LifetimeModel model);
std::vector<std::string> lifetime_parameter_names(LifetimeModel model);

FitResult fit_lifetime(const LifetimeTrace& trace, LifetimeModel model, const LeastSquaresOptions& options = {});

struct ReflectivitySpectrum {
  std::vector<double> wavelength_nm;
  std::vector<double> reflectivity;
};

/// baseline - depth * (w/2)^2 / ((x - x_c)^2 + (w/2)^2), params {x_c_nm, fwhm_nm, depth, baseline}.
CurveModel reflectivity_curve(std::span<const double> wavelength_nm);

/// Lorentzian dip fit. The result also lists the derived quality factor "q" = x_c / fwhm
/// with its propagated sigma.
FitResult fit_reflectivity(const ReflectivitySpectrum& spectrum, const LeastSquaresOptions& options = {});

struct DelayFitOptions {
  /// Error bar used for points flagged with inflate_uncertainty.
  double outlier_sigma = 0.10;
  LeastSquaresOptions solver{};
};

/// Delay-dependent visibility of both series, filtered observations first.
/// Params {gamma_star, delta_omega_filtered, delta_omega_unfiltered, tau_c_ns}
/// with V(0) = gamma / (gamma + gamma*) shared by both series.
CurveModel delay_visibility_curve(std::span<const double> filtered_delays_ns,
                                  std::span<const double> unfiltered_delays_ns, Rate gamma);

/// Joint fit with shared V(0) and tau_c and one wandering amplitude per series.
/// The result also lists the derived "v0".
FitResult fit_delay_visibility(const DelayVisibilitySeries& filtered, const DelayVisibilitySeries& unfiltered,
                               Rate gamma, const DelayFitOptions& options = {});

}  // namespace hom
