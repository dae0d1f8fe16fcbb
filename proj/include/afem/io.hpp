#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "afem/adaptivity.hpp"
#include "afem/mesh.hpp"
#include "afem/optimizer.hpp"
#include "afem/wavefield.hpp"

namespace afem {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Strict parse of a whole string as a double.
double parse_double(const std::string& text);

struct NamedField {
  std::string name;
  std::vector<double> values;
  int components = 1;
};

/// Legacy-VTK ASCII unstructured grid (cell type 10).
void write_vtk(const std::filesystem::path& path, const TetMesh& mesh, const std::vector<NamedField>& point_data,
               const std::vector<NamedField>& cell_data);

/// Columns: t, vertex, x, y, z, e1, e2, e3.
void write_observation_csv(const std::filesystem::path& path, const BoundaryObservation& obs);

void write_history_csv(const std::filesystem::path& path, const std::vector<CgRecord>& history);

struct SummaryRow {
  LevelRecord record;
  double rel_error = 0.0;
};

/// Deterministic per-level table: no timings.
void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows, int k_rec,
                       const std::string& stop_reason);

/// Rows of a CSV file split at commas (no quoting).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// key = value lines followed by one "file <name> sha256 <hash>" line per file.
void write_manifest(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::filesystem::path& root, const std::vector<std::string>& files);

}  // namespace afem
