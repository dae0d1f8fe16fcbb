#include "afem/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "afem/error.hpp"

namespace afem {

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw ConfigError("not a number: '" + text + "'");
  return v;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_field(std::ofstream& out, const NamedField& f, std::size_t count) {
  if (f.values.size() != count * static_cast<std::size_t>(f.components)) {
    throw MismatchError("vtk field '" + f.name + "' has the wrong size");
  }
  if (f.components == 1) {
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << format_double(v) << '\n';
  } else if (f.components == 3) {
    out << "VECTORS " << f.name << " double\n";
    for (std::size_t i = 0; i < count; ++i) {
      out << format_double(f.values[3 * i]) << ' ' << format_double(f.values[3 * i + 1]) << ' '
          << format_double(f.values[3 * i + 2]) << '\n';
    }
  } else {
    throw ConfigError("vtk fields need 1 or 3 components");
  }
}

}  // namespace

void write_vtk(const std::filesystem::path& path, const TetMesh& mesh, const std::vector<NamedField>& point_data,
               const std::vector<NamedField>& cell_data) {
  auto out = open_out(path);
  out << "# vtk DataFile Version 3.0\nafem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const auto& p : mesh.vertices()) {
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  }
  out << "CELLS " << mesh.num_tets() << ' ' << 5 * mesh.num_tets() << '\n';
  for (const auto& t : mesh.tets()) out << "4 " << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  out << "CELL_TYPES " << mesh.num_tets() << '\n';
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) out << "10\n";
  if (!cell_data.empty()) {
    out << "CELL_DATA " << mesh.num_tets() << '\n';
    for (const auto& f : cell_data) write_field(out, f, mesh.num_tets());
  }
  if (!point_data.empty()) {
    out << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& f : point_data) write_field(out, f, mesh.num_vertices());
  }
  check_written(out, path);
}

void write_observation_csv(const std::filesystem::path& path, const BoundaryObservation& obs) {
  auto out = open_out(path);
  out << "t,vertex,x,y,z,e1,e2,e3\n";
  for (std::size_t n = 0; n < obs.values.size(); ++n) {
    const std::string t = format_double(obs.grid.time(n));
    for (std::size_t j = 0; j < obs.vertices.size(); ++j) {
      const auto& p = obs.positions[j];
      out << t << ',' << obs.vertices[j] << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
          << format_double(p[2]);
      for (int c = 0; c < 3; ++c) out << ',' << format_double(obs.values[n][3 * j + c]);
      out << '\n';
    }
  }
  check_written(out, path);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<CgRecord>& history) {
  auto out = open_out(path);
  out << "iter,F,grad_norm,gamma,beta,eps_norm,halvings,wall_seconds\n";
  for (const auto& r : history) {
    out << r.iter << ',' << format_double(r.value) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.gamma) << ',' << format_double(r.beta) << ',' << format_double(r.eps_norm) << ','
        << r.halvings << ',' << std::fixed << std::setprecision(3) << r.wall_seconds << std::defaultfloat << '\n';
  }
  check_written(out, path);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows, int k_rec,
                       const std::string& stop_reason) {
  auto out = open_out(path);
  out << "level,elements,vertices,steps,dt,eps_peak,error_percent,M_k,cg_stop,eps_change,final_grad_norm,"
         "min_grad_norm,indicator_max,marked,k_rec,stop_reason\n";
  for (const auto& row : rows) {
    const auto& r = row.record;
    out << r.level << ',' << r.elements << ',' << r.vertices << ',' << r.steps << ',' << format_double(r.dt) << ','
        << format_double(r.eps_peak) << ',' << format_double(100.0 * row.rel_error) << ',' << r.cg_iterations << ','
        << to_string(r.cg_stop) << ',' << format_double(r.eps_change) << ',' << format_double(r.final_grad_norm)
        << ',' << format_double(r.min_grad_norm) << ',' << format_double(r.indicator_max) << ',' << r.marked << ','
        << k_rec << ',' << stop_reason << '\n';
  }
  check_written(out, path);
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  check_written(out, path);
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_manifest(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::filesystem::path& root, const std::vector<std::string>& files) {
  std::ostringstream text;
  for (const auto& [k, v] : entries) text << k << " = " << v << '\n';
  for (const auto& f : files) text << "file " << f << " sha256 " << sha256_file(root / f) << '\n';
  write_file(path, text.str());
}

}  // namespace afem
