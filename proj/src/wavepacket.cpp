#include "hom/wavepacket.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hom/errors.hpp"

namespace hom {

namespace {

double trapezoid(std::span<const double> y, double dx) {
  if (y.size() < 2) return 0.0;
  double sum = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) sum += y[i];
  return sum * dx;
}

double trapezoid_product(std::span<const double> a, std::span<const double> b, double dx) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double sum = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) sum += a[i] * b[i];
  return sum * dx;
}

// Turns f^2 samples into a normalized amplitude.
std::vector<double> normalized_amplitude(std::vector<double> intensity, const TimeGrid& grid) {
  const double norm = trapezoid(intensity, grid.dt_ns);
  if (!(norm > 0.0)) throw DomainError("emission profile has zero weight on the grid");
  for (auto& v : intensity) v = std::sqrt(std::max(v, 0.0) / norm);
  return intensity;
}

void check_grid_for_lifetime(const TimeGrid& grid, double t1_ps) {
  if (grid.size < 2 || !(grid.dt_ns > 0.0)) throw DomainError("time grid needs at least 2 samples");
  const double span = grid.end() - std::max(grid.t0_ns, 0.0);
  if (span < 5.0 * t1_ps * 1e-3) {
    throw TruncationError("time grid spans " + std::to_string(span) + " ns, below 5 T1 = " +
                          std::to_string(5.0 * t1_ps * 1e-3) + " ns");
  }
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  const double tol = 1e-12 * std::max(a.dt_ns, b.dt_ns);
  return a.size == b.size && std::abs(a.t0_ns - b.t0_ns) <= tol && std::abs(a.dt_ns - b.dt_ns) <= tol;
}

constexpr double kMaxResampleRatio = 64.0;

}  // namespace

void EmitterParams::validate() const {
  if (!(t1_ps > 0.0) || !std::isfinite(t1_ps)) throw DomainError("t1_ps must be positive");
  if (gamma_star.per_ns < 0.0) throw DomainError("gamma_star must be non-negative");
  if (delta_omega.per_ns < 0.0) throw DomainError("delta_omega must be non-negative");
  if (!(tau_c_ns > 0.0)) throw DomainError("tau_c_ns must be positive");
  if (fss.micro_ev < 0.0) throw DomainError("fss must be non-negative");
  if (!std::isfinite(omega0.rad_per_ns)) throw DomainError("omega0 must be finite");
  if (brightness < 0.0 || brightness > 1.0) throw DomainError("brightness must lie in [0, 1]");
  if (sideband_fraction < 0.0 || sideband_fraction > 1.0) {
    throw DomainError("sideband_fraction must lie in [0, 1]");
  }
}

TimeGrid TimeGrid::spanning(double span_ns, std::size_t samples) {
  if (!(span_ns > 0.0) || samples < 2) throw DomainError("grid needs positive span and >= 2 samples");
  return TimeGrid{0.0, span_ns / static_cast<double>(samples - 1), samples};
}

TimeGrid default_grid(double max_t1_ps) {
  if (!(max_t1_ps > 0.0)) throw DomainError("t1 must be positive");
  return TimeGrid::spanning(kDefaultGridLifetimes * max_t1_ps * 1e-3, kDefaultGridSamples);
}

TimeGrid default_grid(double t1_a_ps, double t1_b_ps) {
  if (!(t1_a_ps > 0.0) || !(t1_b_ps > 0.0)) throw DomainError("t1 must be positive");
  const double hi = std::max(t1_a_ps, t1_b_ps);
  const double ratio = hi / std::min(t1_a_ps, t1_b_ps);
  const auto samples = static_cast<std::size_t>(std::ceil(static_cast<double>(kDefaultGridSamples) * ratio));
  return TimeGrid::spanning(kDefaultGridLifetimes * hi * 1e-3, samples);
}

WavepacketProfile::WavepacketProfile(TimeGrid grid, std::vector<double> amplitude)
    : grid_(grid), amplitude_(std::move(amplitude)) {
  if (amplitude_.size() != grid_.size) throw DomainError("amplitude and grid sizes differ");
  for (double v : amplitude_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("amplitude must be finite and non-negative");
  }
}

double WavepacketProfile::value_at(double t_ns) const {
  const double x = (t_ns - grid_.t0_ns) / grid_.dt_ns;
  if (x < 0.0 || x > static_cast<double>(grid_.size - 1)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(x), grid_.size - 2);
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * amplitude_[i] + w * amplitude_[i + 1];
}

double WavepacketProfile::norm_squared() const {
  return trapezoid_product(amplitude_, amplitude_, grid_.dt_ns);
}

WavepacketProfile mono_exponential_profile(const EmitterParams& params, const TimeGrid& grid) {
  check_grid_for_lifetime(grid, params.t1_ps);
  const double gamma = params.radiative_rate().per_ns;
  std::vector<double> intensity(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double t = grid.at(i);
    intensity[i] = t < 0.0 ? 0.0 : std::exp(-gamma * t);
  }
  return WavepacketProfile(grid, normalized_amplitude(std::move(intensity), grid));
}

WavepacketProfile fss_beating_profile(const EmitterParams& params, const TimeGrid& grid) {
  if (params.fss.micro_ev == 0.0) return mono_exponential_profile(params, grid);
  if (params.charge != ChargeState::X) {
    throw DomainError("fine-structure beating applies to neutral excitons only");
  }
  check_grid_for_lifetime(grid, params.t1_ps);
  const double gamma = params.radiative_rate().per_ns;
  const double half_beat = 0.5 * energy_to_angular_rate(params.fss).per_ns;
  std::vector<double> intensity(grid.size);
  for (std::size_t i = 0; i < grid.size; ++i) {
    const double t = grid.at(i);
    if (t < 0.0) continue;
    const double s = std::sin(half_beat * t);
    intensity[i] = s * s * std::exp(-gamma * t);
  }
  return WavepacketProfile(grid, normalized_amplitude(std::move(intensity), grid));
}

WavepacketProfile emission_profile(const EmitterParams& params, const TimeGrid& grid) {
  if (params.charge == ChargeState::X && params.fss.micro_ev > 0.0) {
    return fss_beating_profile(params, grid);
  }
  return mono_exponential_profile(params, grid);
}

double classical_overlap(const WavepacketProfile& p, const WavepacketProfile& q) {
  const auto& gp = p.grid();
  const auto& gq = q.grid();
  if (same_grid(gp, gq)) {
    const double overlap = trapezoid_product(p.amplitude(), q.amplitude(), gp.dt_ns);
    const double norm = p.norm_squared() * q.norm_squared();
    return std::clamp(overlap * overlap / norm, 0.0, 1.0);
  }

  const double fine = std::min(gp.dt_ns, gq.dt_ns);
  const double coarse = std::max(gp.dt_ns, gq.dt_ns);
  if (coarse / fine > kMaxResampleRatio) {
    throw GridMismatchError("grid spacings differ by more than a factor " +
                            std::to_string(kMaxResampleRatio));
  }
  const double start = std::min(gp.t0_ns, gq.t0_ns);
  const double stop = std::max(gp.end(), gq.end());
  if (std::max(gp.t0_ns, gq.t0_ns) >= std::min(gp.end(), gq.end())) {
    throw GridMismatchError("profile grids do not overlap");
  }
  const auto n = static_cast<std::size_t>(std::ceil((stop - start) / fine)) + 1;
  const TimeGrid target{start, fine, n};
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = p.value_at(target.at(i));
    b[i] = q.value_at(target.at(i));
  }
  const double overlap = trapezoid_product(a, b, fine);
  const double norm = trapezoid_product(a, a, fine) * trapezoid_product(b, b, fine);
  return std::clamp(overlap * overlap / norm, 0.0, 1.0);
}

double closed_form_temporal_overlap(Rate gamma_i, Rate gamma_j) {
  if (!(gamma_i.per_ns > 0.0) || !(gamma_j.per_ns > 0.0)) {
    throw DomainError("temporal overlap needs strictly positive rates");
  }
  const double sum = gamma_i.per_ns + gamma_j.per_ns;
  return 4.0 * gamma_i.per_ns * gamma_j.per_ns / (sum * sum);
}

EmissionTimeSampler::EmissionTimeSampler(const WavepacketProfile& profile)
    : grid_(profile.grid()), cdf_(profile.grid().size, 0.0) {
  const auto f = profile.amplitude();
  for (std::size_t i = 1; i < cdf_.size(); ++i) {
    cdf_[i] = cdf_[i - 1] + 0.5 * grid_.dt_ns * (f[i - 1] * f[i - 1] + f[i] * f[i]);
  }
  const double total = cdf_.back();
  for (auto& c : cdf_) c /= total;
}

double EmissionTimeSampler::sample(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.t0_ns;
  if (it == cdf_.end()) return grid_.end();
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[i - 1];
  const double hi = cdf_[i];
  const double w = hi > lo ? (u - lo) / (hi - lo) : 0.0;
  return grid_.at(i - 1) + w * grid_.dt_ns;
}

}  // namespace hom
