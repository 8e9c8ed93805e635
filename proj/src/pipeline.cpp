#include "hom/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "hom/csv.hpp"
#include "hom/errors.hpp"
#include "hom/spectral_noise.hpp"

namespace hom {

using nlohmann::json;

namespace {

std::ofstream open_file(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

double profile_overlap(const EmitterParams& a, const EmitterParams& b) {
  const TimeGrid grid = default_grid(a.t1_ps, b.t1_ps);
  return classical_overlap(emission_profile(a, grid), emission_profile(b, grid));
}

}  // namespace

PreparedPair prepare_pair(const RunConfig& cfg) {
  cfg.validate();
  PreparedPair out;
  auto& p = out.pair;
  p.a = cfg.a.params;
  p.b = cfg.b.params;
  p.mean_detuning = cfg.mean_detuning;
  p.filter = cfg.filter;
  p.s_classical = cfg.s_classical ? *cfg.s_classical : profile_overlap(p.a, p.b);
  if (cfg.filter) {
    const auto fa = apply_filter(p.a, *cfg.filter);
    const auto fb = apply_filter(p.b, *cfg.filter);
    p.a = fa.params;
    p.b = fb.params;
    out.transmission_a = fa.transmission;
    out.transmission_b = fb.transmission;
  }
  p.validate();
  return out;
}

json overlap_report(const RunConfig& cfg) {
  const PreparedPair prepared = prepare_pair(cfg);
  const SourcePair& p = prepared.pair;
  const double s_closed = closed_form_temporal_overlap(p.a.radiative_rate(), p.b.radiative_rate());
  const double m_voigt = mwo_voigt_averaged(p);

  json j;
  j["config_hash"] = config_hash(cfg);
  j["s_classical"] = p.s_classical;
  j["s_closed_form"] = s_closed;
  j["m_no_dephasing"] = mwo_no_dephasing(p.a.radiative_rate(), p.b.radiative_rate(), p.mean_detuning);
  j["m_dephased"] = mwo_with_dephasing(p);
  j["m_voigt_averaged"] = m_voigt;
  j["m_voigt_averaged_linear_s"] = mwo_voigt_averaged_linear_s(p);
  j["analytic_prediction"] = analytic_prediction(p);
  j["combined_wandering_ns_inv"] = p.combined_wandering().per_ns;
  j["delta_omega_a_ns_inv"] = p.a.delta_omega.per_ns;
  j["delta_omega_b_ns_inv"] = p.b.delta_omega.per_ns;
  j["transmission_a"] = prepared.transmission_a;
  j["transmission_b"] = prepared.transmission_b;
  j["filtered"] = cfg.filter.has_value();
  if (cfg.a.individual_m && cfg.b.individual_m) {
    const double bound = remote_upper_bound(p.s_classical, *cfg.a.individual_m, *cfg.b.individual_m);
    j["upper_bound"] = bound;
    j["bound_satisfied"] = m_voigt <= bound;
  } else {
    j["upper_bound"] = p.s_classical;
    j["bound_satisfied"] = m_voigt <= p.s_classical;
  }
  return j;
}

SimulationResult run_simulation(const RunConfig& cfg, Execution exec) {
  const PreparedPair prepared = prepare_pair(cfg);
  SimulationResult r;
  r.parallel = simulate_histogram(prepared.pair, cfg.experiment, Polarization::parallel, cfg.seed, exec);
  r.perpendicular = simulate_histogram(prepared.pair, cfg.experiment, Polarization::perpendicular, cfg.seed, exec);
  r.estimate = estimate_visibility(r.parallel, r.perpendicular);
  r.analytic = analytic_prediction(prepared.pair);
  return r;
}

json summary_json(const RunConfig& cfg, const VisibilityEstimate& est) {
  return {{"v_tpi", est.v_tpi}, {"sigma", est.sigma},     {"a_par", est.a_par},
          {"a_perp", est.a_perp}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_file(path);
  out << j.dump(2) << "\n";
}

void write_overlap(const RunConfig& cfg, const std::filesystem::path& dir) {
  write_json(dir / "overlap.json", overlap_report(cfg));
}

SimulationResult write_simulation(const RunConfig& cfg, const std::filesystem::path& dir, Execution exec) {
  SimulationResult r = run_simulation(cfg, exec);
  const std::string hash = config_hash(cfg);
  std::filesystem::create_directories(dir);
  write_histogram_csv((dir / "histogram_parallel.csv").string(), r.parallel, hash);
  write_histogram_csv((dir / "histogram_perpendicular.csv").string(), r.perpendicular, hash);
  {
    auto out = open_file(dir / "histogram_plot.csv");
    out << "# config_hash: " << hash << "\n";
    out << "bin_center_ns,counts_parallel,counts_perpendicular\n";
    for (std::size_t i = 0; i < r.parallel.counts.size(); ++i) {
      out << format_number(r.parallel.bin_centers_ns[i]) << ',' << r.parallel.counts[i] << ','
          << r.perpendicular.counts[i] << '\n';
    }
  }
  write_json(dir / "summary.json", summary_json(cfg, r.estimate));
  return r;
}

void write_delay_prediction(const RunConfig& cfg, const std::filesystem::path& path) {
  const PreparedPair prepared = prepare_pair(cfg);
  const EmitterParams* src[2] = {&prepared.pair.a, &prepared.pair.b};
  double v0[2];
  double dw_r[2];
  for (int s = 0; s < 2; ++s) {
    v0[s] = intrinsic_visibility(src[s]->radiative_rate(), src[s]->gamma_star);
    dw_r[s] = src[s]->delta_omega.per_ns / src[s]->total_width().per_ns;
  }
  auto out = open_file(path);
  out << "# config_hash: " << config_hash(cfg) << "\n";
  out << "delay_ns,visibility_a,visibility_b\n";
  const auto& d = cfg.delay_prediction;
  for (int i = 0; i < d.points; ++i) {
    const double delay = d.max_delay_ns * i / (d.points - 1);
    out << format_number(delay);
    for (int s = 0; s < 2; ++s) {
      out << ',' << format_number(visibility_vs_delay(v0[s], dw_r[s], src[s]->tau_c_ns, delay));
    }
    out << '\n';
  }
}

}  // namespace hom
