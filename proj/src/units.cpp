#include "hom/units.hpp"

#include <cmath>
#include <string>

#include "hom/errors.hpp"

namespace hom {

Rate Rate::of(double per_ns) {
  if (!std::isfinite(per_ns) || per_ns < 0.0) {
    throw DomainError("rate must be finite and non-negative, got " + std::to_string(per_ns));
  }
  return Rate{per_ns};
}

Rate energy_to_angular_rate(EnergySplitting e) {
  if (!std::isfinite(e.micro_ev) || e.micro_ev < 0.0) {
    throw DomainError("energy splitting must be non-negative");
  }
  return Rate{e.micro_ev / kHbarMicroEvNs};
}

EnergySplitting angular_rate_to_energy(Rate r) { return EnergySplitting{r.per_ns * kHbarMicroEvNs}; }

Rate lifetime_to_rate(double t1_ps) {
  if (!std::isfinite(t1_ps) || t1_ps <= 0.0) {
    throw DomainError("lifetime must be positive, got " + std::to_string(t1_ps) + " ps");
  }
  return Rate{1000.0 / t1_ps};
}

double rate_to_lifetime_ps(Rate r) {
  if (r.per_ns <= 0.0) throw DomainError("rate must be positive to invert");
  return 1000.0 / r.per_ns;
}

Frequency wavelength_to_angular_frequency(Wavelength w) {
  if (!std::isfinite(w.nm) || w.nm <= 0.0) throw DomainError("wavelength must be positive");
  return Frequency{2.0 * kPi * kSpeedOfLightNmPerNs / w.nm};
}

Wavelength angular_frequency_to_wavelength(Frequency f) {
  if (!std::isfinite(f.rad_per_ns) || f.rad_per_ns <= 0.0) {
    throw DomainError("angular frequency must be positive");
  }
  return Wavelength{2.0 * kPi * kSpeedOfLightNmPerNs / f.rad_per_ns};
}

Rate linewidth_pm_to_angular(double fwhm_pm, Wavelength center) {
  if (!(fwhm_pm > 0.0)) throw DomainError("filter width must be positive");
  if (!(center.nm > 0.0)) throw DomainError("center wavelength must be positive");
  const double dl_nm = fwhm_pm * 1e-3;
  return Rate{2.0 * kPi * kSpeedOfLightNmPerNs * dl_nm / (center.nm * center.nm)};
}

}  // namespace hom
