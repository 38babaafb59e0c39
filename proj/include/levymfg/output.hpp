#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "levymfg/fp.hpp"
#include "levymfg/grid.hpp"

namespace levymfg {

// Shared header stamp for every emitted artifact.
struct OutputMeta {
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  bool stable_output = false;  // omit wall-clock timings from summaries
};

void ensure_directory(const std::string& dir);

// CSV layout: '#' comment lines carrying the meta stamp, one column-name row,
// then data rows with every float at 17 significant digits.
void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_field_csv(const std::string& path, const OutputMeta& meta,
                     const Grid& grid, const SpaceTimeField& field);

void write_measure_csv(const std::string& path, const OutputMeta& meta,
                       const Grid& grid, const std::vector<int>& time_indices,
                       const std::vector<DiscreteMeasure>& measures);

// Summary skeleton: config hash, version, seed.
nlohmann::ordered_json meta_json(const OutputMeta& meta);

// Records elapsed seconds under j["timings"][name] unless stable output is on.
void add_timing(nlohmann::ordered_json& j, const OutputMeta& meta,
                const std::string& name, double seconds);

void write_json(const std::string& path, const nlohmann::ordered_json& j);

}  // namespace levymfg
