#pragma once

#include <optional>
#include <string>

#include "catsync/series.hpp"
#include "catsync/tangent.hpp"

namespace catsync {

inline constexpr int kCacheVersion = 1;

/// Series coefficients, 𝔐 coefficients and tangent frame of one run.
struct CachedRun {
  SeriesBundle bundle;
  MSeries mseries;
  TangentFrame frame;
};

/// Cache key from the coupling (ε included, since μ = ε), grid, M_sum and n_max.
std::string cache_key(const CouplingSpec& spec, const SeriesSettings& s, int n_max);

/// File layout: "CATSYNC\n", one JSON header line, then little-endian
/// doubles. Throws NumericalError only on I/O failure.
void save_run(const std::string& path, const std::string& key, const CachedRun& run);

/// Returns nothing when the file is absent, of another version, or keyed
/// differently.
std::optional<CachedRun> load_run(const std::string& path, const std::string& key,
                                  const CouplingSpec& spec, const PhaseConstants& pc,
                                  const SeriesSettings& settings);

}  // namespace catsync
