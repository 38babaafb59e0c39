#include "levymfg/output.hpp"

#include <filesystem>
#include <fstream>

#include "levymfg/errors.hpp"
#include "levymfg/numerics.hpp"

namespace levymfg {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("output: cannot open '" + path + "' for writing");
  return out;
}

void write_meta_comments(std::ofstream& out, const OutputMeta& meta) {
  out << "# config_hash: " << meta.config_hash << "\n";
  out << "# version: " << meta.version << "\n";
  out << "# seed: " << meta.seed << "\n";
}

}  // namespace

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("output: cannot create directory '" + dir +
                          "': " + ec.message());
  }
}

void write_csv(const std::string& path, const OutputMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  write_meta_comments(out, meta);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) {
      throw ValidationError("output: row width does not match the column count");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_g17(row[c]);
    }
    out << "\n";
  }
}

void write_field_csv(const std::string& path, const OutputMeta& meta,
                     const Grid& grid, const SpaceTimeField& field) {
  std::ofstream out = open_out(path);
  write_meta_comments(out, meta);
  out << "# label: " << field.label << "\n";
  out << "t,x,value\n";
  for (int k = 0; k < field.time_slices; ++k) {
    for (int i = 0; i < field.space_points; ++i) {
      out << format_g17(grid.time(k)) << "," << format_g17(grid.point(i)) << ","
          << format_g17(field.at(k, i)) << "\n";
    }
  }
}

void write_measure_csv(const std::string& path, const OutputMeta& meta,
                       const Grid& grid, const std::vector<int>& time_indices,
                       const std::vector<DiscreteMeasure>& measures) {
  if (time_indices.size() != measures.size()) {
    throw ValidationError("output: one time index is needed per measure");
  }
  std::ofstream out = open_out(path);
  write_meta_comments(out, meta);
  out << "t,x,mass\n";
  for (std::size_t s = 0; s < measures.size(); ++s) {
    for (int i = 0; i < measures[s].size(); ++i) {
      out << format_g17(grid.time(time_indices[s])) << ","
          << format_g17(grid.point(i)) << "," << format_g17(measures[s].mass[i])
          << "\n";
    }
  }
}

nlohmann::ordered_json meta_json(const OutputMeta& meta) {
  nlohmann::ordered_json j;
  j["config_hash"] = meta.config_hash;
  j["version"] = meta.version;
  j["seed"] = meta.seed;
  return j;
}

void add_timing(nlohmann::ordered_json& j, const OutputMeta& meta,
                const std::string& name, double seconds) {
  if (meta.stable_output) return;
  j["timings"][name] = seconds;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace levymfg
