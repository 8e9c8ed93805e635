#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hom/parallel.hpp"
#include "hom/units.hpp"

namespace hom {

/// Stationary Ornstein-Uhlenbeck wandering of an emitter's center frequency.
struct WanderingProcess {
  Rate sigma{0.0};
  double tau_c_ns = 1400.0;
  std::uint64_t seed = 0;
};

/// Exact conditional OU update, usable step by step inside other simulations.
class WanderingState {
 public:
  WanderingState(Rate sigma, double tau_c_ns);

  /// Draws the stationary starting value.
  void reset(Engine& rng);
  /// Advances by dt_ns and returns the new offset (rad/ns).
  double advance(double dt_ns, Engine& rng);
  /// Advances by the step set with set_fixed_step().
  double advance_fixed(Engine& rng);
  void set_fixed_step(double dt_ns);

  double value() const { return value_; }

 private:
  double sigma_;
  double tau_c_;
  double value_ = 0.0;
  double fixed_rho_ = 0.0;
  double fixed_kick_ = 0.0;
  std::normal_distribution<double> normal_;
};

/// Mean-zero OU path at the given times with stationary std sigma and
/// autocorrelation exp(-dt / tau_c). Deterministic per seed.
std::vector<Frequency> sample_frequency_path(const WanderingProcess& process,
                                             std::span<const double> times_ns);

/// v0 / [1 + 2 dw_r^2 (1 - exp(-delay / tau_c))].
double visibility_vs_delay(double v0, double delta_omega_r, double tau_c_ns, double delay_ns);

/// gamma / (gamma + gamma*).
double intrinsic_visibility(Rate gamma, Rate gamma_star);

struct DelayVisibilityPoint {
  double delay_ns = 0.0;
  double visibility = 0.0;
  double sigma_v = 0.0;
  /// Replace sigma_v by the outlier error bar when fitting.
  bool inflate_uncertainty = false;
};

struct DelayVisibilitySeries {
  std::vector<DelayVisibilityPoint> entries;
  std::string source_label;
  bool filtered = false;

  /// Delays strictly increasing, visibilities within [0, 1].
  void validate() const;
};

}  // namespace hom
