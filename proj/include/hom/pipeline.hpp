#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hom/config.hpp"
#include "hom/hom_montecarlo.hpp"

namespace hom {

/// Source pair after filtering, with s computed from the emission profiles
/// when the config does not fix it.
struct PreparedPair {
  SourcePair pair;
  double transmission_a = 1.0;
  double transmission_b = 1.0;
};

PreparedPair prepare_pair(const RunConfig& cfg);

/// Analytic overlaps (no dephasing, dephased, Voigt-averaged) and bounds.
nlohmann::json overlap_report(const RunConfig& cfg);

struct SimulationResult {
  CoincidenceHistogram parallel;
  CoincidenceHistogram perpendicular;
  VisibilityEstimate estimate;
  double analytic = 0.0;
};

SimulationResult run_simulation(const RunConfig& cfg, Execution exec = Execution::parallel);

/// Exactly {v_tpi, sigma, a_par, a_perp, config_hash, seed}.
nlohmann::json summary_json(const RunConfig& cfg, const VisibilityEstimate& est);

/// Delay-dependent visibility of each source as predicted from its own parameters.
void write_delay_prediction(const RunConfig& cfg, const std::filesystem::path& path);

/// JSON text with a trailing newline, written in binary mode.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// overlap.json.
void write_overlap(const RunConfig& cfg, const std::filesystem::path& dir);
/// histogram_parallel.csv, histogram_perpendicular.csv, histogram_plot.csv, summary.json.
SimulationResult write_simulation(const RunConfig& cfg, const std::filesystem::path& dir,
                                  Execution exec = Execution::parallel);

}  // namespace hom
