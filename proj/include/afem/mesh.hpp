#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "afem/vec3.hpp"

namespace afem {

using Index = std::int32_t;
using Tet = std::array<Index, 4>;

inline constexpr Index kNoNeighbor = -1;

/// Axis-aligned box [lo, hi].
struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{1.0, 1.0, 1.0};

  bool contains(const Vec3& p, double tol = 1e-9) const;
  /// Interior test; points on the box surface (within tol) are outside.
  bool strictly_contains(const Vec3& p, double tol = 1e-9) const;
  double volume() const;
  double surface_area() const;

  bool operator==(const Box&) const = default;
};

/// Which outer-box face a boundary face lies on. Waves travel along x3:
/// front is x3 = lo, back is x3 = hi, everything else is lateral.
enum class BoundarySide : std::uint8_t { front, back, lateral };

const char* to_string(BoundarySide side);
BoundarySide boundary_side_from_string(const std::string& name);

struct Face {
  std::array<Index, 3> v{};
  Index owner = kNoNeighbor;
  Index neighbor = kNoNeighbor;
  /// Unit normal pointing out of the owner tet.
  Vec3 normal{};
  double area = 0.0;

  bool is_boundary() const { return neighbor == kNoNeighbor; }
};

/// Conforming tetrahedral mesh of an axis-aligned box. Immutable once built;
/// geometric quantities (volumes, basis gradients, diameters) are cached at
/// construction.
class TetMesh {
 public:
  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets, std::vector<int> levels, Box outer,
          Box inner);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const Vec3& vertex(std::size_t i) const { return vertices_[i]; }
  const std::vector<Tet>& tets() const { return tets_; }
  const Tet& tet(std::size_t k) const { return tets_[k]; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<int>& levels() const { return levels_; }

  /// Face indices of tet k; local face i is opposite local vertex i.
  const std::array<Index, 4>& tet_faces(std::size_t k) const { return tet_faces_[k]; }
  /// Side tag of face f; only meaningful for boundary faces.
  BoundarySide side(std::size_t f) const { return sides_[f]; }
  const std::vector<Index>& boundary_faces() const { return boundary_faces_; }

  const Box& outer_box() const { return outer_; }
  const Box& inner_box() const { return inner_; }

  double volume(std::size_t k) const { return volumes_[k]; }
  /// Gradient of the barycentric hat function of local vertex a on tet k.
  const Vec3& grad_hat(std::size_t k, int a) const { return grads_[k][a]; }
  double diameter(std::size_t k) const { return diameters_[k]; }
  Vec3 centroid(std::size_t k) const;
  double total_volume() const;

  /// Vertices where the permittivity is a free unknown: strictly inside the
  /// inner box and off the outer boundary.
  const std::vector<std::uint8_t>& free_vertex_mask() const { return free_mask_; }
  bool is_free_vertex(std::size_t i) const { return free_mask_[i] != 0; }
  /// Tets whose centroid lies in the inner box.
  bool in_inner_domain(std::size_t k) const { return inner_tet_[k] != 0; }

  /// Identity used to detect fields living on a different mesh.
  std::uint64_t id() const { return id_; }

 private:
  void build_faces();
  void compute_geometry();

  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<int> levels_;
  Box outer_;
  Box inner_;
  std::vector<Face> faces_;
  std::vector<std::array<Index, 4>> tet_faces_;
  std::vector<BoundarySide> sides_;
  std::vector<Index> boundary_faces_;
  std::vector<double> volumes_;
  std::vector<std::array<Vec3, 4>> grads_;
  std::vector<double> diameters_;
  std::vector<std::uint8_t> free_mask_;
  std::vector<std::uint8_t> inner_tet_;
  std::uint64_t id_;
};

/// Uniform time partition of (0, t_final).
struct TimeGrid {
  double t_final = 1.0;
  std::size_t n_steps = 1;
  double dt = 1.0;

  static TimeGrid uniform(double t_final, std::size_t n_steps);
  /// Fewest steps whose size does not exceed max_dt.
  static TimeGrid with_max_step(double t_final, double max_dt);

  double time(std::size_t n) const { return dt * static_cast<double>(n); }
  std::size_t num_nodes() const { return n_steps + 1; }

  bool operator==(const TimeGrid&) const = default;
};

/// Structured mesh: cubes of side h0, each split into 6 tets around its main
/// diagonal. `inner` defaults to the outer box.
TetMesh build_uniform_mesh(const Box& bounds, double h0);
TetMesh build_uniform_mesh(const Box& bounds, double h0, const Box& inner);

/// Mesh function h(K) = diam(K).
std::vector<double> mesh_function(const TetMesh& mesh);

/// Red refinement of the marked tets followed by red-green conformity
/// closure. Children get level = parent level + 1.
TetMesh refine(const TetMesh& mesh, std::span<const std::size_t> marked);
TetMesh refine_all(const TetMesh& mesh);

struct ConformityReport {
  bool conforming = true;
  bool positive_orientation = true;
  bool watertight = true;
  bool all_vertices_used = true;
  double volume_error = 0.0;

  bool ok() const { return conforming && positive_orientation && watertight && all_vertices_used; }
};

ConformityReport check_conformity(const TetMesh& mesh);

/// Finds the tet containing a point and its barycentric coordinates.
class PointLocator {
 public:
  explicit PointLocator(const TetMesh& mesh);

  struct Hit {
    std::size_t tet = 0;
    std::array<double, 4> weights{};
  };

  /// Throws GeometryError if p lies outside every tet by more than tol
  /// (in barycentric units).
  Hit locate(const Vec3& p, double tol = 1e-9) const;

 private:
  const TetMesh* mesh_;
  Vec3 lo_{};
  Vec3 cell_{};
  std::array<std::size_t, 3> dims_{};
  std::vector<std::size_t> offsets_;
  std::vector<Index> entries_;
};

std::array<double, 4> barycentric(const TetMesh& mesh, std::size_t k, const Vec3& p);

/// P1 evaluation of a scalar nodal field of mesh_a at the vertices of mesh_b.
std::vector<double> interpolate_nodal(std::span<const double> field, const TetMesh& mesh_a,
                                      const TetMesh& mesh_b);

/// Same for interleaved 3-component nodal fields.
std::vector<double> interpolate_nodal_vector(std::span<const double> field, const TetMesh& mesh_a,
                                             const TetMesh& mesh_b);

}  // namespace afem
