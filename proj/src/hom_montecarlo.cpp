#include "hom/hom_montecarlo.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <deque>

#include "hom/errors.hpp"
#include "hom/spectral_noise.hpp"

namespace hom {

namespace {

struct BinLayout {
  std::int64_t half_bins = 0;
  double width_ns = 0.0;
  std::size_t central_lo = 0;
  std::size_t central_hi = 0;

  std::size_t size() const { return static_cast<std::size_t>(2 * half_bins); }
  double center(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(half_bins) + 0.5) * width_ns;
  }
};

BinLayout make_layout(const HomExperimentConfig& cfg) {
  BinLayout b;
  b.width_ns = cfg.bin_width_ps * 1e-3;
  b.half_bins = static_cast<std::int64_t>(std::ceil((cfg.window_peaks + 0.5) * cfg.rep_period_ns / b.width_ns));
  b.central_lo = b.size();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double c = b.center(i);
    if (c >= -0.5 * cfg.rep_period_ns && c < 0.5 * cfg.rep_period_ns) {
      b.central_lo = std::min(b.central_lo, i);
      b.central_hi = i + 1;
    }
  }
  return b;
}

struct Detection {
  std::int64_t pulse;
  double offset_ns;
  bool second_detector;
};

class Blinker {
 public:
  Blinker(double on_prob, double dwell_ns, double rep_ns) : on_prob_(on_prob) {
    const double keep = dwell_ns > 0.0 ? std::exp(-rep_ns / dwell_ns) : 0.0;
    stay_on_ = on_prob + (1.0 - on_prob) * keep;
    turn_on_ = on_prob * (1.0 - keep);
  }
  bool always_on() const { return on_prob_ >= 1.0; }
  void reset(Engine& rng) { on_ = always_on() || uniform_(rng) < on_prob_; }
  bool step(Engine& rng) {
    if (always_on()) return true;
    on_ = uniform_(rng) < (on_ ? stay_on_ : turn_on_);
    return on_;
  }
  bool on() const { return on_; }

 private:
  double on_prob_;
  double stay_on_ = 1.0;
  double turn_on_ = 0.0;
  bool on_ = true;
  std::uniform_real_distribution<double> uniform_;
};

struct SourceModel {
  const EmitterParams* params;
  EmissionTimeSampler sampler;
};

// Precomputed coefficients of the dephased overlap at instantaneous detuning.
struct InterferenceLaw {
  double numerator = 0.0;
  double width_sq = 0.0;
  double operator()(double detuning) const { return numerator / (width_sq + 4.0 * detuning * detuning); }
};

class ShardSimulator {
 public:
  ShardSimulator(const SourcePair& pair, const HomExperimentConfig& cfg, Polarization pol,
                 const BinLayout& layout, const SourceModel& a, const SourceModel& b)
      : pair_(pair), cfg_(cfg), pol_(pol), layout_(layout), src_{&a, &b},
        wander_{WanderingState(pair.a.delta_omega, pair.a.tau_c_ns),
                WanderingState(pair.b.delta_omega, pair.b.tau_c_ns)},
        blink_{Blinker(cfg.blink_on_prob, cfg.blink_dwell_ns, cfg.rep_period_ns),
               Blinker(cfg.blink_on_prob, cfg.blink_dwell_ns, cfg.rep_period_ns)},
        jitter_ns_(cfg.jitter_sigma_ps * 1e-3) {
    const double width_sum = pair.a.total_width().per_ns + pair.b.total_width().per_ns;
    const double rate_sum = pair.a.radiative_rate().per_ns + pair.b.radiative_rate().per_ns;
    law_ = {pair.s_classical * width_sum * rate_sum, width_sum * width_sum};
    for (auto& w : wander_) w.set_fixed_step(cfg.rep_period_ns);
  }

  // Adds the shard's coincidences to `counts` and returns its zero-delay peak count.
  std::uint64_t run(std::uint64_t first_pulse, std::uint64_t last_pulse, std::uint64_t shard_seed,
                    std::vector<std::uint64_t>& counts) {
    Engine rng(shard_seed);
    normal_.reset();
    recent_.clear();
    central_ = 0;
    for (int s = 0; s < 2; ++s) {
      wander_[s].reset(rng);
      blink_[s].reset(rng);
    }
    for (std::uint64_t k = first_pulse; k < last_pulse; ++k) {
      if (k != first_pulse) {
        for (int s = 0; s < 2; ++s) {
          wander_[s].advance_fixed(rng);
          blink_[s].step(rng);
        }
      }
      pulse(static_cast<std::int64_t>(k), rng, counts);
    }
    return central_;
  }

 private:
  void pulse(std::int64_t k, Engine& rng, std::vector<std::uint64_t>& counts) {
    while (!recent_.empty() && recent_.front().pulse < k - cfg_.window_peaks - 1) recent_.pop_front();

    bool emitted[2] = {false, false};
    bool sideband[2] = {false, false};
    double t_emit[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s) {
      if (!blink_[s].on()) continue;
      const auto& p = *src_[s]->params;
      if (p.brightness < 1.0 && uniform_(rng) >= p.brightness) continue;
      emitted[s] = true;
      sideband[s] = p.sideband_fraction > 0.0 && uniform_(rng) < p.sideband_fraction;
      t_emit[s] = src_[s]->sampler.sample(uniform_(rng));
    }

    if (emitted[0] && emitted[1]) {
      bool bunch = false;
      if (pol_ == Polarization::parallel && !sideband[0] && !sideband[1]) {
        const double detuning = pair_.mean_detuning.rad_per_ns + wander_[0].value() - wander_[1].value();
        bunch = uniform_(rng) < law_(detuning);
      }
      if (bunch) {
        const bool port = uniform_(rng) < 0.5;
        detect(k, t_emit[0], port, rng, counts);
        detect(k, t_emit[1], port, rng, counts);
      } else {
        detect(k, t_emit[0], uniform_(rng) < 0.5, rng, counts);
        detect(k, t_emit[1], uniform_(rng) < 0.5, rng, counts);
      }
    } else {
      for (int s = 0; s < 2; ++s) {
        if (emitted[s]) detect(k, t_emit[s], uniform_(rng) < 0.5, rng, counts);
      }
    }

    if (cfg_.g2 > 0.0 && uniform_(rng) < cfg_.g2) {
      const int s = uniform_(rng) < 0.5 ? 0 : 1;
      const double t = src_[s]->sampler.sample(uniform_(rng));
      detect(k, t, uniform_(rng) < 0.5, rng, counts);
    }
  }

  void detect(std::int64_t k, double t_ns, bool second, Engine& rng, std::vector<std::uint64_t>& counts) {
    const double offset = jitter_ns_ > 0.0 ? t_ns + jitter_ns_ * normal_(rng) : t_ns;
    const double origin = static_cast<double>(layout_.half_bins) * layout_.width_ns;
    for (const auto& old : recent_) {
      if (old.second_detector == second) continue;
      const double base = static_cast<double>(k - old.pulse) * cfg_.rep_period_ns;
      // start on detector 1, stop on detector 2
      const double delay = second ? base + offset - old.offset_ns : -(base + offset - old.offset_ns);
      const double x = (delay + origin) / layout_.width_ns;
      if (x < 0.0) continue;
      const auto bin = static_cast<std::size_t>(x);
      if (bin >= counts.size()) continue;
      ++counts[bin];
      if (bin >= layout_.central_lo && bin < layout_.central_hi) ++central_;
    }
    recent_.push_back({k, offset, second});
  }

  const SourcePair& pair_;
  const HomExperimentConfig& cfg_;
  Polarization pol_;
  const BinLayout& layout_;
  const SourceModel* src_[2];
  WanderingState wander_[2];
  Blinker blink_[2];
  double jitter_ns_;
  InterferenceLaw law_;
  std::deque<Detection> recent_;
  std::uint64_t central_ = 0;
  std::uniform_real_distribution<double> uniform_;
  std::normal_distribution<double> normal_;
};

}  // namespace

void HomExperimentConfig::validate() const {
  if (!(rep_period_ns > 0.0)) throw DomainError("rep_period_ns must be positive");
  if (n_pulses < 1) throw DomainError("n_pulses must be at least 1");
  if (jitter_sigma_ps < 0.0) throw DomainError("jitter_sigma_ps must be non-negative");
  if (!(g2 >= 0.0 && g2 < 1.0)) throw DomainError("g2 must lie in [0, 1)");
  if (!(blink_on_prob > 0.0 && blink_on_prob <= 1.0)) throw DomainError("blink_on_prob must lie in (0, 1]");
  if (blink_on_prob < 1.0 && !(blink_dwell_ns > 0.0)) throw DomainError("blink_dwell_ns must be positive");
  if (!(bin_width_ps > 0.0)) throw DomainError("bin_width_ps must be positive");
  if (bin_width_ps * 1e-3 > rep_period_ns) throw DomainError("bin width exceeds the repetition period");
  if (window_peaks < 0) throw DomainError("window_peaks must be non-negative");
}

std::uint64_t CoincidenceHistogram::peak_area(int n) const {
  const double lo = (n - 0.5) * rep_period_ns;
  const double hi = (n + 0.5) * rep_period_ns;
  std::uint64_t sum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (bin_centers_ns[i] >= lo && bin_centers_ns[i] < hi) sum += counts[i];
  }
  return sum;
}

CoincidenceHistogram simulate_histogram(const SourcePair& pair, const HomExperimentConfig& cfg,
                                        Polarization pol, std::uint64_t seed, Execution exec) {
  pair.validate();
  cfg.validate();
  const BinLayout layout = make_layout(cfg);
  const SourceModel a{&pair.a, EmissionTimeSampler(emission_profile(pair.a, default_grid(pair.a.t1_ps)))};
  const SourceModel b{&pair.b, EmissionTimeSampler(emission_profile(pair.b, default_grid(pair.b.t1_ps)))};

  const std::uint64_t shards = (cfg.n_pulses + kPulsesPerShard - 1) / kPulsesPerShard;
  const std::uint64_t stream = pol == Polarization::parallel ? 1 : 2;

  CoincidenceHistogram hist;
  hist.polarization = pol;
  hist.rep_period_ns = cfg.rep_period_ns;
  hist.bin_width_ns = layout.width_ns;
  hist.bin_centers_ns.resize(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) hist.bin_centers_ns[i] = layout.center(i);
  hist.counts.assign(layout.size(), 0);
  hist.shard_central_counts.assign(shards, 0);

  auto run_shard = [&](ShardSimulator& sim, std::uint64_t shard, std::vector<std::uint64_t>& counts) {
    const std::uint64_t first = shard * kPulsesPerShard;
    const std::uint64_t last = std::min(first + kPulsesPerShard, cfg.n_pulses);
    hist.shard_central_counts[shard] = sim.run(first, last, derive_seed(seed, stream, shard), counts);
  };

  if (exec == Execution::serial) {
    ShardSimulator sim(pair, cfg, pol, layout, a, b);
    for (std::uint64_t s = 0; s < shards; ++s) run_shard(sim, s, hist.counts);
  } else {
#pragma omp parallel
    {
      ShardSimulator sim(pair, cfg, pol, layout, a, b);
      std::vector<std::uint64_t> local(layout.size(), 0);
#pragma omp for schedule(dynamic) nowait
      for (std::uint64_t s = 0; s < shards; ++s) run_shard(sim, s, local);
#pragma omp critical
      for (std::size_t i = 0; i < local.size(); ++i) hist.counts[i] += local[i];
    }
  }
  return hist;
}

VisibilityEstimate estimate_visibility(const CoincidenceHistogram& h_par, const CoincidenceHistogram& h_perp) {
  if (h_par.polarization != Polarization::parallel || h_perp.polarization != Polarization::perpendicular) {
    throw DomainError("estimate_visibility expects a parallel and a perpendicular histogram");
  }
  if (h_par.counts.size() != h_perp.counts.size() || h_par.bin_width_ns != h_perp.bin_width_ns ||
      h_par.rep_period_ns != h_perp.rep_period_ns) {
    throw DomainError("histograms do not share a binning");
  }
  const double a = static_cast<double>(h_par.central_area());
  const double b = static_cast<double>(h_perp.central_area());
  if (b <= 0.0) throw EstimationError("perpendicular zero-delay peak is empty");

  VisibilityEstimate est;
  est.a_par = a;
  est.a_perp = b;
  est.v_tpi = 1.0 - a / b;
  est.sigma = std::sqrt(a / (b * b) + a * a / (b * b * b));

  auto total_variance = [](const std::vector<std::uint64_t>& shards) {
    const double n = static_cast<double>(shards.size());
    if (shards.size() < 2) return 0.0;
    double mean = 0.0;
    for (auto c : shards) mean += static_cast<double>(c);
    mean /= n;
    double ss = 0.0;
    for (auto c : shards) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
    return n * ss / (n - 1.0);
  };
  const double var_a = total_variance(h_par.shard_central_counts);
  const double var_b = total_variance(h_perp.shard_central_counts);
  est.sigma_batch = std::sqrt(var_a / (b * b) + a * a * var_b / (b * b * b * b));
  return est;
}

double analytic_prediction(const SourcePair& pair) {
  return (1.0 - pair.a.sideband_fraction) * (1.0 - pair.b.sideband_fraction) * mwo_voigt_averaged(pair);
}

}  // namespace hom
