#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hom/hom_montecarlo.hpp"
#include "hom/overlap.hpp"

namespace hom {

// Configuration files are JSON. Every physical quantity carries its unit in
// the key name (t1_ps, gamma_star_ns_inv, center_nm, ...).

struct SourceConfig {
  std::string label;
  EmitterParams params;
  /// Individual two-photon indistinguishability, when measured.
  std::optional<double> individual_m;
};

struct DelayPredictionConfig {
  double max_delay_ns = 600.0;
  int points = 61;
};

struct RunConfig {
  SourceConfig a;
  SourceConfig b;
  Frequency mean_detuning{0.0};
  /// Computed from the emission profiles when absent.
  std::optional<double> s_classical;
  std::optional<FilterParams> filter;
  HomExperimentConfig experiment;
  DelayPredictionConfig delay_prediction;
  std::uint64_t seed = 1;
  std::string outputs = "out";

  void validate() const;
};

/// Throws ConfigError with a message naming the offending key.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON of everything that determines the numbers (seed and output
/// directory excluded).
nlohmann::json to_json(const RunConfig& cfg);
/// FNV-1a 64-bit hash of the canonical JSON, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
/// FNV-1a 64-bit hash of arbitrary bytes, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

EmitterParams parse_emitter(const nlohmann::json& j);
nlohmann::json to_json(const EmitterParams& p);

struct CavityParams {
  Wavelength x_c{0.0};
  double q = 1.0;
  double detuning_pm = 0.0;
};

struct CatalogEntry {
  std::string label;
  /// Sample the source sits on; pairs are formed across samples only.
  std::string sample;
  EmitterParams params;
  CavityParams cavity;
  double tuning_min_nm = 0.0;
  double tuning_max_nm = 0.0;
  double peak_brightness = 0.0;
};

struct SourceCatalog {
  std::vector<CatalogEntry> sources;

  /// Unique labels, lambda_min < lambda_max, q > 0.
  void validate() const;
};

SourceCatalog parse_catalog(const nlohmann::json& j);
SourceCatalog load_catalog(const std::string& path);

struct PairMatch {
  std::string first;
  std::string second;
  double common_min_nm = 0.0;
  double common_max_nm = 0.0;

  double width() const { return common_max_nm - common_min_nm; }
};

/// Cross-sample pairs whose tuning ranges intersect, widest common range first.
std::vector<PairMatch> match_pairs(const SourceCatalog& catalog);

}  // namespace hom
