#include <omp.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "hom/config.hpp"
#include "hom/csv.hpp"
#include "hom/errors.hpp"
#include "hom/fits.hpp"
#include "hom/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInvalidConfig = 2;
constexpr int kExitNumerical = 3;

struct RunOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::uint64_t> pulses;
  std::optional<double> filter_fwhm_pm;
  int threads = 0;
  bool serial = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Override the configured seed");
  cmd->add_option("--out", o.out, "Output directory (defaults to the configured one)");
  cmd->add_option("--pulses", o.pulses, "Override experiment.n_pulses");
  cmd->add_option("--filter-fwhm-pm", o.filter_fwhm_pm, "Apply a spectral filter of this FWHM (0 disables)");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)");
  cmd->add_flag("--serial", o.serial, "Use the serial reference loop");
}

hom::RunConfig load(const RunOptions& o) {
  hom::RunConfig cfg = hom::load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.pulses) cfg.experiment.n_pulses = *o.pulses;
  if (o.filter_fwhm_pm) {
    if (*o.filter_fwhm_pm == 0.0) {
      cfg.filter.reset();
    } else {
      hom::FilterParams f = cfg.filter.value_or(hom::FilterParams{});
      f.fwhm_pm = *o.filter_fwhm_pm;
      cfg.filter = f;
    }
  }
  if (!o.out.empty()) cfg.outputs = o.out;
  cfg.validate();
  if (o.threads > 0) omp_set_num_threads(o.threads);
  return cfg;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hom::fnv1a_hex(ss.str());
}

json fit_json(const hom::FitResult& r, const std::string& hash) {
  json params = json::object();
  json sigmas = json::object();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    params[r.names[i]] = r.params[i];
    const double s = r.sigmas[i];
    sigmas[r.names[i]] = std::isfinite(s) ? json(s) : json(nullptr);
  }
  return {{"params", params},       {"sigmas", sigmas},   {"residual_norm", r.residual_norm},
          {"converged", r.converged}, {"n_iter", r.n_iter}, {"config_hash", hash}};
}

void emit(const json& j, const std::string& out_dir, const std::string& name) {
  std::cout << j.dump(2) << "\n";
  if (!out_dir.empty()) hom::write_json(fs::path(out_dir) / name, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Remote two-photon interference simulator and parameter estimator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* overlap = app.add_subcommand("overlap", "Analytic overlaps and bounds -> overlap.json");
  add_run_options(overlap, run);
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo coincidence histograms and visibility");
  add_run_options(simulate, run);
  auto* predict = app.add_subcommand("predict-delay", "Visibility versus photon separation -> delay_prediction.csv");
  add_run_options(predict, run);

  std::string input;
  std::string out_dir;
  std::string model = "mono";
  auto* fit_life = app.add_subcommand("fit-lifetime", "Fit a time-resolved decay trace");
  fit_life->add_option("--input", input, "CSV with columns time_ps,counts")->required()->check(CLI::ExistingFile);
  fit_life->add_option("--model", model, "mono or fss")->check(CLI::IsMember({"mono", "fss"}));
  fit_life->add_option("--out", out_dir, "Directory for fit_lifetime.json");

  auto* fit_refl = app.add_subcommand("fit-reflectivity", "Fit a Lorentzian cavity dip");
  fit_refl->add_option("--input", input, "CSV with columns wavelength_nm,reflectivity")
      ->required()
      ->check(CLI::ExistingFile);
  fit_refl->add_option("--out", out_dir, "Directory for fit_reflectivity.json");

  std::string filtered_path;
  std::string unfiltered_path;
  double t1_ps = 162.0;
  double outlier_sigma = 0.10;
  auto* fit_delay = app.add_subcommand("fit-delay", "Joint fit of filtered and unfiltered delay series");
  fit_delay->add_option("--filtered", filtered_path, "Filtered series CSV")->required()->check(CLI::ExistingFile);
  fit_delay->add_option("--unfiltered", unfiltered_path, "Unfiltered series CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit_delay->add_option("--t1-ps", t1_ps, "Radiative lifetime of the source");
  fit_delay->add_option("--outlier-sigma", outlier_sigma, "Error bar for points flagged inflate=1");
  fit_delay->add_option("--out", out_dir, "Directory for fit_delay.json");

  std::string catalog_path;
  auto* match = app.add_subcommand("match-pairs", "Cross-sample pairs with overlapping tuning ranges");
  match->add_option("--config", catalog_path, "Source catalog (JSON)")->required()->check(CLI::ExistingFile);
  match->add_option("--out", out_dir, "Directory for pairs.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidConfig;
  }

  try {
    const auto exec = run.serial ? hom::Execution::serial : hom::Execution::parallel;
    if (overlap->parsed()) {
      const auto cfg = load(run);
      const json report = hom::overlap_report(cfg);
      hom::write_json(fs::path(cfg.outputs) / "overlap.json", report);
      std::cout << report.dump(2) << "\n";
    } else if (simulate->parsed()) {
      const auto cfg = load(run);
      const auto r = hom::write_simulation(cfg, cfg.outputs, exec);
      std::cout << hom::summary_json(cfg, r.estimate).dump(2) << "\n";
      std::cerr << "analytic prediction " << r.analytic << ", batch sigma " << r.estimate.sigma_batch << "\n";
    } else if (predict->parsed()) {
      const auto cfg = load(run);
      const fs::path path = fs::path(cfg.outputs) / "delay_prediction.csv";
      hom::write_delay_prediction(cfg, path);
      std::cout << path.string() << "\n";
    } else if (fit_life->parsed()) {
      const auto trace = hom::read_lifetime_csv(input);
      const auto m = model == "fss" ? hom::LifetimeModel::FssBeating : hom::LifetimeModel::MonoExp;
      emit(fit_json(hom::fit_lifetime(trace, m), file_hash(input)), out_dir, "fit_lifetime.json");
    } else if (fit_refl->parsed()) {
      const auto spectrum = hom::read_reflectivity_csv(input);
      emit(fit_json(hom::fit_reflectivity(spectrum), file_hash(input)), out_dir, "fit_reflectivity.json");
    } else if (fit_delay->parsed()) {
      const auto filtered = hom::read_delay_csv(filtered_path, "filtered", true);
      const auto unfiltered = hom::read_delay_csv(unfiltered_path, "unfiltered", false);
      hom::DelayFitOptions opts;
      opts.outlier_sigma = outlier_sigma;
      const auto r = hom::fit_delay_visibility(filtered, unfiltered, hom::lifetime_to_rate(t1_ps), opts);
      emit(fit_json(r, hom::fnv1a_hex(file_hash(filtered_path) + file_hash(unfiltered_path))), out_dir,
           "fit_delay.json");
    } else if (match->parsed()) {
      const auto catalog = hom::load_catalog(catalog_path);
      json pairs = json::array();
      for (const auto& p : hom::match_pairs(catalog)) {
        pairs.push_back({{"first", p.first}, {"second", p.second},
                         {"common_range_nm", {p.common_min_nm, p.common_max_nm}}});
      }
      emit({{"pairs", pairs}, {"config_hash", file_hash(catalog_path)}}, out_dir, "pairs.json");
    }
  } catch (const hom::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const hom::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const hom::UnsupportedRegimeError& e) {
    std::cerr << "unsupported regime: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
