#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afem/mesh.hpp"

namespace afem {

/// Nodal P1 relative permittivity on a mesh.
struct PermittivityField {
  std::uint64_t mesh_id = 0;
  std::vector<double> values;
};

PermittivityField constant_permittivity(const TetMesh& mesh, double value);

/// 1 <= eps <= eps_max everywhere and eps = 1 on every frozen vertex.
bool is_admissible(const PermittivityField& eps, const TetMesh& mesh, double eps_max, double tol = 1e-12);

void require_same_mesh(std::uint64_t field_mesh, const TetMesh& mesh, const char* what);

/// Row-sum lumped eps-weighted mass: m_i = sum_K int_K eps phi_i with eps P1.
/// No admissibility check is made.
std::vector<double> lumped_mass(const TetMesh& mesh, std::span<const double> eps);

/// Lumped volume weights of the inner domain (tets whose centroid lies in the
/// inner box). These define the discrete L2(Omega) inner product.
std::vector<double> domain_weights(const TetMesh& mesh);

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double weighted_norm(std::span<const double> w, std::span<const double> a);

/// Lumped face quadrature weights (area / 3 per face vertex) of one boundary side.
std::vector<double> boundary_weights(const TetMesh& mesh, BoundarySide side);

/// Sorted vertex ids lying on boundary faces of the given sides.
std::vector<Index> boundary_vertices(const TetMesh& mesh, std::span<const BoundarySide> sides);

/// Piecewise-linear operators of the weak form on one mesh, for fixed eps.
///
/// apply(v) returns the vector of (grad v, grad phi) - (div v, div phi)
/// + s (eps_c div v, div phi) over all vector test hats phi; eps_c is the
/// barycentric value of eps. The form is symmetric, so the adjoint problem
/// uses the same application.
class WaveOperator {
 public:
  WaveOperator(const TetMesh& mesh, const PermittivityField& eps, double s);

  const TetMesh& mesh() const { return *mesh_; }
  double gauge() const { return s_; }
  const std::vector<double>& mass() const { return mass_; }

  /// out = K v for interleaved 3-component nodal vectors.
  void apply(std::span<const double> v, std::span<double> out) const;

 private:
  const TetMesh* mesh_;
  double s_;
  std::vector<double> mass_;
  std::vector<double> eps_centroid_;
};

/// Per-tet gradient of a P1 vector field; row c is grad(v_c).
using Tensor3 = std::array<Vec3, 3>;

Tensor3 element_gradient(const TetMesh& mesh, std::size_t k, std::span<const double> v);
double element_divergence(const TetMesh& mesh, std::size_t k, std::span<const double> v);
Vec3 element_mean(const TetMesh& mesh, std::size_t k, std::span<const double> v);

/// Per-tet maximal normal jump of a piecewise-constant vector quantity q:
/// max over interior faces of |(q_K1 - q_K2) . n|. Boundary faces add 0.
std::vector<double> face_jump_normal(const TetMesh& mesh, std::span<const Vec3> q);

/// Tensor variant: jump of (G_K1 - G_K2) n measured in the Euclidean norm.
/// Used for the normal derivative of vector fields.
std::vector<double> face_jump_normal(const TetMesh& mesh, std::span<const Tensor3> g);

/// Time jumps of the time derivative of a piecewise-linear-in-time nodal
/// trajectory: node[k][i] = |forward quotient - backward quotient| (0 at the
/// first and last nodes), interval[k][i] = max(node[k][i], node[k+1][i]).
struct TimeJumps {
  std::vector<std::vector<double>> node;
  std::vector<std::vector<double>> interval;
};

TimeJumps time_jump(std::span<const std::vector<double>> levels, double dt, int components);

}  // namespace afem
