#include "hom/spectral_noise.hpp"

#include <cmath>

#include "hom/errors.hpp"

namespace hom {

WanderingState::WanderingState(Rate sigma, double tau_c_ns) : sigma_(sigma.per_ns), tau_c_(tau_c_ns) {
  if (sigma_ < 0.0) throw DomainError("wandering sigma must be non-negative");
  if (!(tau_c_ > 0.0)) throw DomainError("wandering timescale must be positive");
}

void WanderingState::reset(Engine& rng) {
  normal_.reset();
  value_ = sigma_ * normal_(rng);
}

double WanderingState::advance(double dt_ns, Engine& rng) {
  const double rho = std::exp(-dt_ns / tau_c_);
  value_ = rho * value_ + sigma_ * std::sqrt(1.0 - rho * rho) * normal_(rng);
  return value_;
}

void WanderingState::set_fixed_step(double dt_ns) {
  fixed_rho_ = std::exp(-dt_ns / tau_c_);
  fixed_kick_ = sigma_ * std::sqrt(1.0 - fixed_rho_ * fixed_rho_);
}

double WanderingState::advance_fixed(Engine& rng) {
  value_ = fixed_rho_ * value_ + fixed_kick_ * normal_(rng);
  return value_;
}

std::vector<Frequency> sample_frequency_path(const WanderingProcess& process,
                                             std::span<const double> times_ns) {
  for (std::size_t i = 1; i < times_ns.size(); ++i) {
    if (!(times_ns[i] > times_ns[i - 1])) throw DomainError("sample times must be strictly increasing");
  }
  std::vector<Frequency> path;
  path.reserve(times_ns.size());
  if (times_ns.empty()) return path;
  Engine rng(process.seed);
  WanderingState state(process.sigma, process.tau_c_ns);
  state.reset(rng);
  path.push_back({state.value()});
  for (std::size_t i = 1; i < times_ns.size(); ++i) {
    path.push_back({state.advance(times_ns[i] - times_ns[i - 1], rng)});
  }
  return path;
}

double visibility_vs_delay(double v0, double delta_omega_r, double tau_c_ns, double delay_ns) {
  if (!(v0 >= 0.0 && v0 <= 1.0)) throw DomainError("v0 must lie in [0, 1]");
  if (delta_omega_r < 0.0) throw DomainError("relative wandering must be non-negative");
  if (!(tau_c_ns > 0.0)) throw DomainError("tau_c must be positive");
  if (delay_ns < 0.0) throw DomainError("delay must be non-negative");
  const double decorrelated = 1.0 - std::exp(-delay_ns / tau_c_ns);
  return v0 / (1.0 + 2.0 * delta_omega_r * delta_omega_r * decorrelated);
}

double intrinsic_visibility(Rate gamma, Rate gamma_star) {
  if (!(gamma.per_ns > 0.0)) throw DomainError("radiative rate must be positive");
  if (gamma_star.per_ns < 0.0) throw DomainError("pure dephasing must be non-negative");
  return gamma.per_ns / (gamma.per_ns + gamma_star.per_ns);
}

void DelayVisibilitySeries::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (!(e.visibility >= 0.0 && e.visibility <= 1.0)) {
      throw DomainError("visibility outside [0, 1] at delay " + std::to_string(e.delay_ns));
    }
    if (e.sigma_v < 0.0) throw DomainError("negative visibility uncertainty");
    if (i > 0 && !(e.delay_ns > entries[i - 1].delay_ns)) {
      throw DomainError("delays must be strictly increasing");
    }
  }
}

}  // namespace hom
