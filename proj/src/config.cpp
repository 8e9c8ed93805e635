#include "hom/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "hom/errors.hpp"

namespace hom {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing key '") + key + "'");
  return get_or<T>(j, key, T{});
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

SourceConfig parse_source(const json& j, const std::string& where) {
  SourceConfig s;
  s.label = get_or<std::string>(j, "label", where);
  json emitter = j;
  emitter.erase("label");
  emitter.erase("individual_m");
  s.params = parse_emitter(emitter);
  if (j.contains("individual_m") && !j.at("individual_m").is_null()) s.individual_m = j.at("individual_m").get<double>();
  return s;
}

json source_json(const SourceConfig& s) {
  json j = to_json(s.params);
  j["label"] = s.label;
  j["individual_m"] = s.individual_m ? json(*s.individual_m) : json(nullptr);
  return j;
}

}  // namespace

EmitterParams parse_emitter(const json& j) {
  reject_unknown(j,
                 {"t1_ps", "gamma_star_ns_inv", "delta_omega_ns_inv", "tau_c_ns", "center_nm", "fss_ueV",
                  "theta_rad", "charge", "brightness", "sideband_fraction"},
                 "source");
  EmitterParams p;
  p.t1_ps = require<double>(j, "t1_ps");
  p.gamma_star = Rate{get_or(j, "gamma_star_ns_inv", 0.0)};
  p.delta_omega = Rate{get_or(j, "delta_omega_ns_inv", 0.0)};
  p.tau_c_ns = get_or(j, "tau_c_ns", 1400.0);
  const double center = get_or(j, "center_nm", 0.0);
  p.omega0 = center > 0.0 ? wavelength_to_angular_frequency(Wavelength{center}) : Frequency{0.0};
  p.fss = EnergySplitting{get_or(j, "fss_ueV", 0.0)};
  p.theta_rad = get_or(j, "theta_rad", 0.0);
  const auto charge = get_or<std::string>(j, "charge", "CX");
  if (charge == "X") {
    p.charge = ChargeState::X;
  } else if (charge == "CX") {
    p.charge = ChargeState::CX;
  } else {
    throw ConfigError("charge must be \"X\" or \"CX\", got \"" + charge + "\"");
  }
  p.brightness = get_or(j, "brightness", 1.0);
  p.sideband_fraction = get_or(j, "sideband_fraction", 0.05);
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

json to_json(const EmitterParams& p) {
  return {{"t1_ps", p.t1_ps},
          {"gamma_star_ns_inv", p.gamma_star.per_ns},
          {"delta_omega_ns_inv", p.delta_omega.per_ns},
          {"tau_c_ns", p.tau_c_ns},
          {"center_nm", p.omega0.rad_per_ns > 0.0 ? angular_frequency_to_wavelength(p.omega0).nm : 0.0},
          {"fss_ueV", p.fss.micro_ev},
          {"theta_rad", p.theta_rad},
          {"charge", p.charge == ChargeState::X ? "X" : "CX"},
          {"brightness", p.brightness},
          {"sideband_fraction", p.sideband_fraction}};
}

void RunConfig::validate() const {
  try {
    a.params.validate();
    b.params.validate();
    experiment.validate();
    if (s_classical && !(*s_classical >= 0.0 && *s_classical <= 1.0)) throw DomainError("s_classical outside [0, 1]");
    for (const auto& m : {a.individual_m, b.individual_m}) {
      if (m && !(*m >= 0.0 && *m <= 1.0)) throw DomainError("individual_m outside [0, 1]");
    }
    if (filter && !(filter->fwhm_pm > 0.0)) throw DomainError("filter fwhm_pm must be positive");
    if (delay_prediction.points < 2 || !(delay_prediction.max_delay_ns > 0.0)) {
      throw DomainError("delay_prediction needs >= 2 points and a positive max delay");
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const json& j) {
  reject_unknown(j, {"source_a", "source_b", "pair", "filter", "experiment", "delay_prediction", "seed", "outputs"},
                 "run config");
  RunConfig cfg;
  if (!j.contains("source_a") || !j.contains("source_b")) throw ConfigError("run config needs source_a and source_b");
  cfg.a = parse_source(j.at("source_a"), "A");
  cfg.b = parse_source(j.at("source_b"), "B");
  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    reject_unknown(p, {"mean_detuning_rad_per_ns", "s_classical"}, "pair");
    cfg.mean_detuning = Frequency{get_or(p, "mean_detuning_rad_per_ns", 0.0)};
    if (p.contains("s_classical") && !p.at("s_classical").is_null()) cfg.s_classical = p.at("s_classical").get<double>();
  }
  if (j.contains("filter") && !j.at("filter").is_null()) {
    const auto& f = j.at("filter");
    reject_unknown(f, {"center_nm", "fwhm_pm"}, "filter");
    FilterParams fp;
    fp.fwhm_pm = require<double>(f, "fwhm_pm");
    fp.center = Wavelength{get_or(f, "center_nm", 924.8)};
    cfg.filter = fp;
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    reject_unknown(e,
                   {"rep_period_ns", "n_pulses", "jitter_sigma_ps", "g2", "blink_on_prob", "blink_dwell_ns",
                    "bin_width_ps", "window_peaks"},
                   "experiment");
    auto& x = cfg.experiment;
    x.rep_period_ns = get_or(e, "rep_period_ns", x.rep_period_ns);
    x.n_pulses = get_or<std::uint64_t>(e, "n_pulses", x.n_pulses);
    x.jitter_sigma_ps = get_or(e, "jitter_sigma_ps", x.jitter_sigma_ps);
    x.g2 = get_or(e, "g2", x.g2);
    x.blink_on_prob = get_or(e, "blink_on_prob", x.blink_on_prob);
    x.blink_dwell_ns = get_or(e, "blink_dwell_ns", x.blink_dwell_ns);
    x.bin_width_ps = get_or(e, "bin_width_ps", x.bin_width_ps);
    x.window_peaks = get_or(e, "window_peaks", x.window_peaks);
  }
  if (j.contains("delay_prediction")) {
    const auto& d = j.at("delay_prediction");
    reject_unknown(d, {"max_delay_ns", "points"}, "delay_prediction");
    cfg.delay_prediction.max_delay_ns = get_or(d, "max_delay_ns", cfg.delay_prediction.max_delay_ns);
    cfg.delay_prediction.points = get_or(d, "points", cfg.delay_prediction.points);
  }
  if (!j.contains("seed")) throw ConfigError("run config needs an explicit seed");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 1);
  cfg.outputs = get_or<std::string>(j, "outputs", cfg.outputs);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json(path)); }

json to_json(const RunConfig& cfg) {
  const auto& x = cfg.experiment;
  json j;
  j["source_a"] = source_json(cfg.a);
  j["source_b"] = source_json(cfg.b);
  j["pair"] = {{"mean_detuning_rad_per_ns", cfg.mean_detuning.rad_per_ns},
               {"s_classical", cfg.s_classical ? json(*cfg.s_classical) : json(nullptr)}};
  j["filter"] = cfg.filter ? json{{"center_nm", cfg.filter->center.nm}, {"fwhm_pm", cfg.filter->fwhm_pm}}
                           : json(nullptr);
  j["experiment"] = {{"rep_period_ns", x.rep_period_ns}, {"n_pulses", x.n_pulses},
                     {"jitter_sigma_ps", x.jitter_sigma_ps}, {"g2", x.g2},
                     {"blink_on_prob", x.blink_on_prob}, {"blink_dwell_ns", x.blink_dwell_ns},
                     {"bin_width_ps", x.bin_width_ps}, {"window_peaks", x.window_peaks}};
  j["delay_prediction"] = {{"max_delay_ns", cfg.delay_prediction.max_delay_ns},
                           {"points", cfg.delay_prediction.points}};
  return j;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void SourceCatalog::validate() const {
  if (sources.empty()) throw ConfigError("catalog is empty");
  std::set<std::string> labels;
  for (const auto& s : sources) {
    if (!labels.insert(s.label).second) throw ConfigError("duplicate catalog label " + s.label);
    if (!(s.tuning_min_nm < s.tuning_max_nm)) throw ConfigError("tuning range of " + s.label + " is empty");
    if (!(s.cavity.q > 0.0)) throw ConfigError("quality factor of " + s.label + " must be positive");
  }
}

SourceCatalog parse_catalog(const json& j) {
  if (!j.contains("sources") || !j.at("sources").is_array()) throw ConfigError("catalog needs a sources array");
  SourceCatalog cat;
  for (const auto& s : j.at("sources")) {
    CatalogEntry e;
    e.label = require<std::string>(s, "label");
    const auto underscore = e.label.find('_');
    e.sample = get_or<std::string>(s, "sample", e.label.substr(0, underscore));
    const auto range = require<std::vector<double>>(s, "tuning_range_nm");
    if (range.size() != 2) throw ConfigError("tuning_range_nm of " + e.label + " needs two values");
    e.tuning_min_nm = range[0];
    e.tuning_max_nm = range[1];
    e.peak_brightness = get_or(s, "peak_brightness", 0.0);
    if (s.contains("cavity")) {
      const auto& c = s.at("cavity");
      reject_unknown(c, {"x_c_nm", "q", "detuning_pm"}, "cavity of " + e.label);
      e.cavity.x_c = Wavelength{get_or(c, "x_c_nm", 0.0)};
      e.cavity.q = get_or(c, "q", 1.0);
      e.cavity.detuning_pm = get_or(c, "detuning_pm", 0.0);
    }
    if (s.contains("emitter")) e.params = parse_emitter(s.at("emitter"));
    cat.sources.push_back(std::move(e));
  }
  cat.validate();
  return cat;
}

SourceCatalog load_catalog(const std::string& path) { return parse_catalog(read_json(path)); }

std::vector<PairMatch> match_pairs(const SourceCatalog& catalog) {
  catalog.validate();
  std::vector<PairMatch> out;
  const auto& src = catalog.sources;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t k = i + 1; k < src.size(); ++k) {
      if (src[i].sample == src[k].sample) continue;
      const double lo = std::max(src[i].tuning_min_nm, src[k].tuning_min_nm);
      const double hi = std::min(src[i].tuning_max_nm, src[k].tuning_max_nm);
      if (!(lo < hi)) continue;
      auto first = src[i].label;
      auto second = src[k].label;
      if (second < first) std::swap(first, second);
      out.push_back({first, second, lo, hi});
    }
  }
  std::sort(out.begin(), out.end(), [](const PairMatch& x, const PairMatch& y) {
    if (x.width() != y.width()) return x.width() > y.width();
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
  return out;
}

}  // namespace hom
