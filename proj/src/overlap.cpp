#include "hom/overlap.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include "hom/errors.hpp"
#include "hom/faddeeva.hpp"

namespace hom {

namespace {

constexpr std::size_t kChunk = std::size_t{1} << 16;
constexpr std::uint64_t kMonteCarloStream = 0x4d4f5641;  // "MOVA"

double voigt_core(const SourcePair& pair) {
  const double ga = pair.a.radiative_rate().per_ns;
  const double gb = pair.b.radiative_rate().per_ns;
  const double mean_width = 0.5 * (pair.a.total_width().per_ns + pair.b.total_width().per_ns);
  return 0.5 * kPi * (ga + gb) *
         voigt(pair.mean_detuning, Rate{mean_width}, pair.combined_wandering());
}

double clamp_overlap(double m) {
  if (m > 1.0 + 1e-9) {
    std::cerr << "warning: Voigt-averaged overlap " << m << " exceeds 1, clamped\n";
  }
  return std::clamp(m, 0.0, 1.0);
}

// Count, mean and centred sum of squares of one chunk.
struct ChunkSums {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
};

ChunkSums run_chunk(const SourcePair& pair, std::size_t begin, std::size_t end, std::uint64_t seed,
                    std::size_t chunk_index) {
  Engine rng(derive_seed(seed, kMonteCarloStream, chunk_index));
  std::normal_distribution<double> normal;
  const double mean = pair.mean_detuning.rad_per_ns;
  const double sigma = pair.combined_wandering().per_ns;
  ChunkSums out;
  for (std::size_t i = begin; i < end; ++i) {
    const double detuning = mean + sigma * normal(rng);
    const double m = mwo_with_dephasing(pair, Frequency{detuning});
    out.n += 1.0;
    const double d = m - out.mean;
    out.mean += d / out.n;
    out.m2 += d * (m - out.mean);
  }
  return out;
}

// Transmission of a Lorentzian filter for a line displaced by x (rad/ns).
double lorentz_transmission(double x, double hwhm) { return hwhm * hwhm / (hwhm * hwhm + x * x); }

struct FilteredMoments {
  double mean_transmission = 1.0;
  double sigma = 0.0;
};

// Simpson quadrature over the Gaussian wandering distribution weighted by the filter.
FilteredMoments filter_moments(double sigma, double offset, double hwhm) {
  if (sigma == 0.0) return {lorentz_transmission(offset, hwhm), 0.0};
  constexpr int kIntervals = 4000;
  const double lo = -12.0 * sigma;
  const double h = 24.0 * sigma / kIntervals;
  double w0 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double p0 = 0.0;
  for (int k = 0; k <= kIntervals; ++k) {
    const double x = lo + h * k;
    const double simpson = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double gauss = simpson * std::exp(-0.5 * x * x / (sigma * sigma));
    const double t = gauss * lorentz_transmission(x + offset, hwhm);
    p0 += gauss;
    w0 += t;
    w1 += t * x;
    w2 += t * x * x;
  }
  const double mean = w1 / w0;
  return {w0 / p0, std::sqrt(std::max(w2 / w0 - mean * mean, 0.0))};
}

double filter_offset(const EmitterParams& params, const FilterParams& filter) {
  if (params.omega0.rad_per_ns <= 0.0) return 0.0;
  return params.omega0.rad_per_ns - wavelength_to_angular_frequency(filter.center).rad_per_ns;
}

}  // namespace

Rate SourcePair::combined_wandering() const {
  return Rate{std::hypot(a.delta_omega.per_ns, b.delta_omega.per_ns)};
}

void SourcePair::validate() const {
  a.validate();
  b.validate();
  if (!(s_classical >= 0.0 && s_classical <= 1.0)) throw DomainError("s_classical must lie in [0, 1]");
  if (!std::isfinite(mean_detuning.rad_per_ns)) throw DomainError("mean detuning must be finite");
  if (filter && !(filter->fwhm_pm > 0.0)) throw DomainError("filter fwhm must be positive");
}

double mwo_no_dephasing(Rate gamma_i, Rate gamma_j, Frequency delta) {
  if (!(gamma_i.per_ns > 0.0) || !(gamma_j.per_ns > 0.0)) throw DomainError("rates must be positive");
  const double sum = gamma_i.per_ns + gamma_j.per_ns;
  const double d = delta.rad_per_ns;
  return 4.0 * gamma_i.per_ns * gamma_j.per_ns / (sum * sum + d * d);
}

double mwo_with_dephasing(const SourcePair& pair, Frequency detuning) {
  const double width_sum = pair.a.total_width().per_ns + pair.b.total_width().per_ns;
  if (!(width_sum > 0.0)) throw DomainError("total widths must be positive");
  const double rate_sum = pair.a.radiative_rate().per_ns + pair.b.radiative_rate().per_ns;
  const double d = detuning.rad_per_ns;
  return pair.s_classical * width_sum * rate_sum / (width_sum * width_sum + 4.0 * d * d);
}

double mwo_with_dephasing(const SourcePair& pair) { return mwo_with_dephasing(pair, pair.mean_detuning); }

double voigt(Frequency x, Rate lorentz_hwhm, Rate gauss_sigma) {
  const double g = lorentz_hwhm.per_ns;
  const double s = gauss_sigma.per_ns;
  if (g < 0.0 || s < 0.0) throw DomainError("voigt widths must be non-negative");
  if (g == 0.0 && s == 0.0) throw DomainError("voigt needs at least one non-zero width");
  const double v = x.rad_per_ns;
  if (s == 0.0) return g / (kPi * (v * v + g * g));
  if (g == 0.0) return std::exp(-0.5 * v * v / (s * s)) / (s * std::sqrt(2.0 * kPi));
  const double scale = s * std::sqrt(2.0);
  const auto w = faddeeva({v / scale, g / scale});
  return w.real() / (scale * std::sqrt(kPi));
}

double mwo_voigt_averaged(const SourcePair& pair) {
  return clamp_overlap(pair.s_classical * pair.s_classical * voigt_core(pair));
}

double mwo_voigt_averaged_linear_s(const SourcePair& pair) {
  return clamp_overlap(pair.s_classical * voigt_core(pair));
}

MonteCarloEstimate mwo_monte_carlo_average(const SourcePair& pair, std::size_t samples,
                                           std::uint64_t seed, Execution exec) {
  if (samples < 2) throw DomainError("Monte-Carlo average needs at least 2 samples");
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(chunks);
  auto body = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    partial[c] = run_chunk(pair, begin, std::min(begin + kChunk, samples), seed, c);
  };
  if (exec == Execution::serial) {
    for (std::size_t c = 0; c < chunks; ++c) body(c);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < chunks; ++c) body(c);
  }
  ChunkSums total;
  for (const auto& p : partial) {
    const double n = total.n + p.n;
    const double d = p.mean - total.mean;
    total.mean += d * p.n / n;
    total.m2 += p.m2 + d * d * total.n * p.n / n;
    total.n = n;
  }
  const double var = total.m2 / (total.n - 1.0);
  return {total.mean, std::sqrt(var / total.n), samples};
}

OverlapResult evaluate_overlap(const SourcePair& pair, OverlapMethod method, std::size_t mc_samples,
                               std::uint64_t mc_seed) {
  pair.validate();
  switch (method) {
    case OverlapMethod::Eq1: {
      const auto ga = pair.a.radiative_rate();
      const auto gb = pair.b.radiative_rate();
      return {mwo_no_dephasing(ga, gb, pair.mean_detuning), closed_form_temporal_overlap(ga, gb),
              method};
    }
    case OverlapMethod::Eq5:
      return {mwo_with_dephasing(pair), pair.s_classical, method};
    case OverlapMethod::Eq6_voigt:
      return {mwo_voigt_averaged(pair), pair.s_classical, method};
    case OverlapMethod::MonteCarloAvg:
      return {mwo_monte_carlo_average(pair, mc_samples, mc_seed).mean, pair.s_classical, method};
  }
  throw DomainError("unknown overlap method");
}

double remote_upper_bound(double s, double m_i, double m_j) {
  for (double v : {s, m_i, m_j}) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("bound inputs must lie in [0, 1]");
  }
  return std::min(s, std::sqrt(m_i * m_j));
}

double indistinguishability_from_hom(double v_hom, double g2) {
  if (!(g2 >= 0.0 && g2 < 1.0)) throw DomainError("g2 must lie in [0, 1)");
  const double m = (v_hom + g2) / (1.0 - g2);
  if (m > 1.0 + 1e-12) {
    throw InconsistentInputError("V_HOM = " + std::to_string(v_hom) + " with g2 = " +
                                 std::to_string(g2) + " implies M > 1");
  }
  return m;
}

FilterOutcome apply_filter(const EmitterParams& params, const FilterParams& filter) {
  params.validate();
  const double fwhm = linewidth_pm_to_angular(filter.fwhm_pm, filter.center).per_ns;
  const double gamma = params.radiative_rate().per_ns;
  if (fwhm <= gamma) {
    throw UnsupportedRegimeError("filter width " + std::to_string(fwhm) +
                                 " rad/ns is not wider than the radiative linewidth " +
                                 std::to_string(gamma) + " rad/ns");
  }
  const auto moments = filter_moments(params.delta_omega.per_ns, filter_offset(params, filter), 0.5 * fwhm);
  FilterOutcome out{params, (1.0 - params.sideband_fraction) * moments.mean_transmission};
  out.params.sideband_fraction = 0.0;
  out.params.delta_omega = Rate{moments.sigma};
  out.params.brightness = params.brightness * out.transmission;
  return out;
}

double calibrate_sideband_fraction(const EmitterParams& params, const FilterParams& filter,
                                   double target_transmission) {
  EmitterParams clean = params;
  clean.sideband_fraction = 0.0;
  const double zero_phonon = apply_filter(clean, filter).transmission;
  const double p = 1.0 - target_transmission / zero_phonon;
  if (!(p >= 0.0 && p <= 1.0)) {
    throw InconsistentInputError("target transmission " + std::to_string(target_transmission) +
                                 " exceeds the zero-phonon transmission " + std::to_string(zero_phonon));
  }
  return p;
}

}  // namespace hom
