#include "hom/csv.hpp"

#include <algorithm>

#include <charconv>
#include <fstream>
#include <sstream>

#include "hom/errors.hpp"

namespace hom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& cell, const std::string& path, int line) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(path + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::vector<std::vector<double>> read_table(const std::string& path, const std::vector<std::string>& columns,
                                            const std::vector<std::string>& optional_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    header = split(t);
    break;
  }
  if (header.size() < columns.size() || header.size() > columns.size() + optional_columns.size()) {
    throw ConfigError(path + ": unexpected header");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& want = i < columns.size() ? columns[i] : optional_columns[i - columns.size()];
    if (header[i] != want) throw ConfigError(path + ": expected column '" + want + "', found '" + header[i] + "'");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto cells = split(t);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " columns");
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_number(c, path, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

LifetimeTrace read_lifetime_csv(const std::string& path) {
  LifetimeTrace trace;
  for (const auto& row : read_table(path, {"time_ps", "counts"})) {
    trace.time_ps.push_back(row[0]);
    trace.counts.push_back(row[1]);
  }
  trace.validate();
  return trace;
}

ReflectivitySpectrum read_reflectivity_csv(const std::string& path) {
  ReflectivitySpectrum s;
  for (const auto& row : read_table(path, {"wavelength_nm", "reflectivity"})) {
    s.wavelength_nm.push_back(row[0]);
    s.reflectivity.push_back(row[1]);
  }
  return s;
}

DelayVisibilitySeries read_delay_csv(const std::string& path, std::string label, bool filtered) {
  DelayVisibilitySeries series;
  series.source_label = std::move(label);
  series.filtered = filtered;
  for (const auto& row : read_table(path, {"delay_ns", "visibility", "sigma_v"}, {"inflate"})) {
    series.entries.push_back({row[0], row[1], row[2], row.size() > 3 && row[3] != 0.0});
  }
  series.validate();
  return series;
}

void write_delay_csv(const std::string& path, const DelayVisibilitySeries& series, const std::string& config_hash) {
  auto out = open_output(path);
  out << "# config_hash: " << config_hash << "\n";
  const bool flags = std::any_of(series.entries.begin(), series.entries.end(),
                                 [](const DelayVisibilityPoint& e) { return e.inflate_uncertainty; });
  out << (flags ? "delay_ns,visibility,sigma_v,inflate\n" : "delay_ns,visibility,sigma_v\n");
  for (const auto& e : series.entries) {
    out << format_number(e.delay_ns) << ',' << format_number(e.visibility) << ',' << format_number(e.sigma_v);
    if (flags) out << ',' << (e.inflate_uncertainty ? 1 : 0);
    out << '\n';
  }
}

void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist, const std::string& config_hash) {
  auto out = open_output(path);
  out << "# config_hash: " << config_hash << "\n";
  out << "bin_center_ns,counts\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << format_number(hist.bin_centers_ns[i]) << ',' << hist.counts[i] << '\n';
  }
}

}  // namespace hom
