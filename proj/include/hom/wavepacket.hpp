#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hom/units.hpp"

namespace hom {

enum class ChargeState { X, CX };

/// Parameters of one quantum-dot source.
struct EmitterParams {
  double t1_ps = 160.0;
  Rate gamma_star{0.0};       // pure dephasing
  Rate delta_omega{0.0};      // spectral-wandering standard deviation
  double tau_c_ns = 1400.0;   // wandering correlation time
  Frequency omega0{0.0};      // emission center
  EnergySplitting fss{0.0};
  double theta_rad = 0.0;     // dipole angle; intensity only, never enters f(t)
  ChargeState charge = ChargeState::CX;
  double brightness = 1.0;
  double sideband_fraction = 0.05;

  Rate radiative_rate() const { return lifetime_to_rate(t1_ps); }
  /// Total Lorentzian width gamma + gamma*.
  Rate total_width() const { return Rate{radiative_rate().per_ns + gamma_star.per_ns}; }

  /// Throws DomainError on any violated invariant.
  void validate() const;
};

/// Uniform time grid starting at t0.
struct TimeGrid {
  double t0_ns = 0.0;
  double dt_ns = 0.0;
  std::size_t size = 0;

  double at(std::size_t i) const { return t0_ns + dt_ns * static_cast<double>(i); }
  double end() const { return at(size - 1); }

  static TimeGrid spanning(double span_ns, std::size_t samples);
};

inline constexpr std::size_t kDefaultGridSamples = 8192;
inline constexpr double kDefaultGridLifetimes = 20.0;

/// [0, 20 * max T1] with 8192 samples.
TimeGrid default_grid(double max_t1_ps);
// Shared grid for two emitters; resolution follows the shorter lifetime.
TimeGrid default_grid(double t1_a_ps, double t1_b_ps);

/// Normalized temporal amplitude f(t) >= 0 with trapezoid integral of f^2 equal to 1.
class WavepacketProfile {
 public:
  WavepacketProfile(TimeGrid grid, std::vector<double> amplitude);

  const TimeGrid& grid() const { return grid_; }
  std::span<const double> amplitude() const { return amplitude_; }

  /// Linear interpolation, zero outside the grid.
  double value_at(double t_ns) const;
  double norm_squared() const;

 private:
  TimeGrid grid_;
  std::vector<double> amplitude_;
};

WavepacketProfile mono_exponential_profile(const EmitterParams& params, const TimeGrid& grid);

/// f^2(t) proportional to sin^2(FSS t / 2 hbar) exp(-t/T1). The sin^2(2 theta)
/// prefactor cancels under normalization. FSS = 0 returns the mono-exponential profile.
WavepacketProfile fss_beating_profile(const EmitterParams& params, const TimeGrid& grid);

/// Beating profile for neutral excitons with non-zero FSS, mono-exponential otherwise.
WavepacketProfile emission_profile(const EmitterParams& params, const TimeGrid& grid);

/// s = [int f_p f_q dt]^2. Mismatched grids are resampled onto the finer one.
double classical_overlap(const WavepacketProfile& p, const WavepacketProfile& q);

/// 4 gi gj / (gi + gj)^2.
double closed_form_temporal_overlap(Rate gamma_i, Rate gamma_j);

/// Draws emission times from f^2 by inverting the cumulative trapezoid integral.
class EmissionTimeSampler {
 public:
  explicit EmissionTimeSampler(const WavepacketProfile& profile);

  /// u in [0, 1).
  double sample(double u) const;

 private:
  TimeGrid grid_;
  std::vector<double> cdf_;
};

}  // namespace hom
