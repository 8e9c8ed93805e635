#pragma once

#include <string>
#include <vector>

#include "hom/fits.hpp"
#include "hom/hom_montecarlo.hpp"
#include "hom/spectral_noise.hpp"

namespace hom {

// All tables: '.' decimal separator, LF line endings, a header row naming the
// columns. Lines starting with '#' carry metadata and are skipped on read.

/// Numeric table with the given header; extra trailing columns are allowed
/// only when listed in `optional_columns`.
std::vector<std::vector<double>> read_table(const std::string& path, const std::vector<std::string>& columns,
                                            const std::vector<std::string>& optional_columns = {});

/// Shortest round-trip decimal representation.
std::string format_number(double v);

LifetimeTrace read_lifetime_csv(const std::string& path);
ReflectivitySpectrum read_reflectivity_csv(const std::string& path);

/// Columns delay_ns, visibility, sigma_v and an optional 0/1 `inflate` flag.
DelayVisibilitySeries read_delay_csv(const std::string& path, std::string label = {}, bool filtered = false);
void write_delay_csv(const std::string& path, const DelayVisibilitySeries& series, const std::string& config_hash);

void write_histogram_csv(const std::string& path, const CoincidenceHistogram& hist, const std::string& config_hash);

}  // namespace hom
