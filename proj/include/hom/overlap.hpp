#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "hom/parallel.hpp"
#include "hom/units.hpp"
#include "hom/wavepacket.hpp"

namespace hom {

enum class FilterShape { Lorentzian };

struct FilterParams {
  Wavelength center{924.8};
  double fwhm_pm = 8.0;
  FilterShape shape = FilterShape::Lorentzian;
};

/// Two remote sources with their mean detuning and classical temporal overlap.
struct SourcePair {
  EmitterParams a;
  EmitterParams b;
  Frequency mean_detuning{0.0};
  double s_classical = 1.0;
  std::optional<FilterParams> filter;

  /// sqrt(delta_omega_a^2 + delta_omega_b^2).
  Rate combined_wandering() const;
  void validate() const;
};

enum class OverlapMethod { Eq1, Eq5, Eq6_voigt, MonteCarloAvg };

struct OverlapResult {
  double m = 0.0;
  double upper_bound = 1.0;
  OverlapMethod method = OverlapMethod::Eq1;
};

/// 4 gi gj / [(gi + gj)^2 + delta^2]: lifetime-limited emitters, no dephasing.
double mwo_no_dephasing(Rate gamma_i, Rate gamma_j, Frequency delta);

/// s (Gi + Gj)(gi + gj) / [(Gi + Gj)^2 + 4 delta^2] with G = g + g* at the pair's mean detuning.
double mwo_with_dephasing(const SourcePair& pair);
/// Same law at an explicit instantaneous detuning.
double mwo_with_dephasing(const SourcePair& pair, Frequency detuning);

/// Normalized Voigt profile: Lorentzian of half width `lorentz_hwhm`
/// convolved with a Gaussian of standard deviation `gauss_sigma`.
double voigt(Frequency x, Rate lorentz_hwhm, Rate gauss_sigma);

/// (pi/2) s^2 (gi + gj) V(mean detuning; mean total width, combined wandering).
/// Carries s squared as printed; clamped to [0, 1].
double mwo_voigt_averaged(const SourcePair& pair);

/// The same Voigt average with a single power of s. This is the exact
/// Gaussian average of mwo_with_dephasing, so it differs from
/// mwo_voigt_averaged by exactly one factor of s.
double mwo_voigt_averaged_linear_s(const SourcePair& pair);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Averages mwo_with_dephasing over detunings drawn from
/// Normal(mean detuning, combined wandering). Deterministic per seed and
/// independent of the execution policy.
MonteCarloEstimate mwo_monte_carlo_average(const SourcePair& pair, std::size_t samples,
                                           std::uint64_t seed,
                                           Execution exec = Execution::parallel);

OverlapResult evaluate_overlap(const SourcePair& pair, OverlapMethod method,
                               std::size_t mc_samples = 1'000'000, std::uint64_t mc_seed = 1);

/// min(s, sqrt(m_i m_j)).
double remote_upper_bound(double s, double m_i, double m_j);

/// (V_HOM + g2) / (1 - g2). Throws InconsistentInputError when the result exceeds 1.
double indistinguishability_from_hom(double v_hom, double g2);

struct FilterOutcome {
  EmitterParams params;
  /// Fraction of the source brightness passing the filter.
  double transmission = 1.0;
};

/// Post-selects the wandering distribution through a Lorentzian filter
/// (wandering is treated as static within one emission). Removes the phonon
/// sideband, narrows delta_omega and scales brightness.
FilterOutcome apply_filter(const EmitterParams& params, const FilterParams& filter);

/// Sideband fraction for which apply_filter transmits `target_transmission`.
double calibrate_sideband_fraction(const EmitterParams& params, const FilterParams& filter,
                                   double target_transmission);

}  // namespace hom
