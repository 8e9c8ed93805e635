#pragma once

// Canonical internal units: time in ns, rates and angular frequencies in
// rad/ns. Lifetimes enter in ps, splittings in ueV, wavelengths in nm.

namespace hom {

inline constexpr double kPi = 3.14159265358979323846;
/// Reduced Planck constant, ueV * ns.
inline constexpr double kHbarMicroEvNs = 0.6582119;
/// Speed of light, nm per ps (= 299792458 nm/ns).
inline constexpr double kSpeedOfLightNmPerPs = 299792.458;
inline constexpr double kSpeedOfLightNmPerNs = kSpeedOfLightNmPerPs * 1000.0;

/// Angular frequency (absolute or a detuning), rad/ns.
struct Frequency {
  double rad_per_ns = 0.0;
};

/// Non-negative rate, ns^-1.
struct Rate {
  double per_ns = 0.0;

  /// Throws DomainError for negative or non-finite values.
  static Rate of(double per_ns);
};

/// Energy splitting, ueV.
struct EnergySplitting {
  double micro_ev = 0.0;
};

struct Wavelength {
  double nm = 0.0;
};

Rate energy_to_angular_rate(EnergySplitting e);
EnergySplitting angular_rate_to_energy(Rate r);

/// 1/T1 with T1 in ps; the result is in ns^-1.
Rate lifetime_to_rate(double t1_ps);
double rate_to_lifetime_ps(Rate r);

Frequency wavelength_to_angular_frequency(Wavelength w);
Wavelength angular_frequency_to_wavelength(Frequency f);

/// Angular full width of a spectral window given in pm around `center`.
Rate linewidth_pm_to_angular(double fwhm_pm, Wavelength center);

}  // namespace hom
