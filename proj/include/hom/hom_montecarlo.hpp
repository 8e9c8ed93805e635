#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hom/overlap.hpp"
#include "hom/parallel.hpp"

namespace hom {

struct HomExperimentConfig {
  double rep_period_ns = 12.2;
  std::uint64_t n_pulses = 1'000'000;
  double jitter_sigma_ps = 12.0;
  double g2 = 0.0;
  double blink_on_prob = 0.9;
  double blink_dwell_ns = 100.0;
  double bin_width_ps = 25.0;
  int window_peaks = 2;

  void validate() const;
};

enum class Polarization { parallel, perpendicular };

/// Pulses simulated per shard. Shard seeds depend only on (seed, polarization,
/// shard index), so results do not depend on the number of workers.
inline constexpr std::uint64_t kPulsesPerShard = std::uint64_t{1} << 16;

struct CoincidenceHistogram {
  std::vector<double> bin_centers_ns;
  std::vector<std::uint64_t> counts;
  Polarization polarization = Polarization::parallel;
  double rep_period_ns = 12.2;
  double bin_width_ns = 0.025;
  /// Zero-delay peak counts of every shard, in shard order.
  std::vector<std::uint64_t> shard_central_counts;

  /// Counts in the peak centred on n * rep_period (window of one period).
  std::uint64_t peak_area(int n) const;
  std::uint64_t central_area() const { return peak_area(0); }
};

struct VisibilityEstimate {
  double v_tpi = 0.0;
  double sigma = 0.0;   // Poisson propagation
  double a_par = 0.0;
  double a_perp = 0.0;
  /// Batch-means error from shard-to-shard scatter; includes slow wandering correlations.
  double sigma_batch = 0.0;
};

/// Pulse-train Monte-Carlo of the HOM correlator for one polarization setting.
///
/// Per pulse and source: blinking (two-state Markov chain), emission with
/// probability `brightness`, sideband flag, emission time drawn from the
/// emission profile, and an OU frequency offset. When both sources emit
/// indistinguishable zero-phonon photons in parallel polarization the pair
/// bunches with probability mwo_with_dephasing at the instantaneous detuning;
/// otherwise each photon leaves through a random port. With probability g2 a
/// distinguishable extra photon is added. Detection times receive Gaussian
/// jitter and every cross-detector pair within the window is histogrammed.
/// Pairs straddling a shard boundary are not counted.
CoincidenceHistogram simulate_histogram(const SourcePair& pair, const HomExperimentConfig& cfg,
                                        Polarization pol, std::uint64_t seed,
                                        Execution exec = Execution::parallel);

/// V = 1 - A_par / A_perp over the zero-delay peaks.
VisibilityEstimate estimate_visibility(const CoincidenceHistogram& h_par,
                                       const CoincidenceHistogram& h_perp);

/// Voigt-averaged overlap reduced by the phonon sideband of both sources.
double analytic_prediction(const SourcePair& pair);

}  // namespace hom
