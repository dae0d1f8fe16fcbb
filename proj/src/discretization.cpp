#include "afem/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afem/error.hpp"

namespace afem {

PermittivityField constant_permittivity(const TetMesh& mesh, double value) {
  return PermittivityField{mesh.id(), std::vector<double>(mesh.num_vertices(), value)};
}

bool is_admissible(const PermittivityField& eps, const TetMesh& mesh, double eps_max, double tol) {
  if (eps.mesh_id != mesh.id() || eps.values.size() != mesh.num_vertices()) return false;
  for (std::size_t i = 0; i < eps.values.size(); ++i) {
    const double v = eps.values[i];
    if (!std::isfinite(v) || v < 1.0 - tol || v > eps_max + tol) return false;
    if (!mesh.is_free_vertex(i) && std::abs(v - 1.0) > tol) return false;
  }
  return true;
}

void require_same_mesh(std::uint64_t field_mesh, const TetMesh& mesh, const char* what) {
  if (field_mesh != mesh.id()) {
    throw MismatchError(std::string(what) + " lives on a different mesh");
  }
}

std::vector<double> lumped_mass(const TetMesh& mesh, std::span<const double> eps) {
  if (eps.size() != mesh.num_vertices()) throw MismatchError("lumped_mass: eps size mismatch");
  std::vector<double> m(mesh.num_vertices(), 0.0);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    const auto& t = mesh.tet(k);
    const double sum = eps[t[0]] + eps[t[1]] + eps[t[2]] + eps[t[3]];
    const double c = mesh.volume(k) / 20.0;
    // int_K eps phi_i = |K|/20 (eps_i + sum_j eps_j)
    for (int a = 0; a < 4; ++a) m[t[a]] += c * (eps[t[a]] + sum);
  }
  return m;
}

std::vector<double> domain_weights(const TetMesh& mesh) {
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    if (!mesh.in_inner_domain(k)) continue;
    const double c = 0.25 * mesh.volume(k);
    for (Index v : mesh.tet(k)) w[v] += c;
  }
  return w;
}

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  if (a.size() != w.size() || b.size() != w.size()) throw MismatchError("weighted_dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a[i] * b[i];
  return s;
}

double weighted_norm(std::span<const double> w, std::span<const double> a) {
  return std::sqrt(weighted_dot(w, a, a));
}

std::vector<double> boundary_weights(const TetMesh& mesh, BoundarySide side) {
  std::vector<double> w(mesh.num_vertices(), 0.0);
  for (Index f : mesh.boundary_faces()) {
    if (mesh.side(f) != side) continue;
    const auto& face = mesh.faces()[f];
    for (Index v : face.v) w[v] += face.area / 3.0;
  }
  return w;
}

std::vector<Index> boundary_vertices(const TetMesh& mesh, std::span<const BoundarySide> sides) {
  std::vector<std::uint8_t> on(mesh.num_vertices(), 0);
  for (Index f : mesh.boundary_faces()) {
    if (std::find(sides.begin(), sides.end(), mesh.side(f)) == sides.end()) continue;
    for (Index v : mesh.faces()[f].v) on[v] = 1;
  }
  std::vector<Index> ids;
  for (std::size_t i = 0; i < on.size(); ++i) {
    if (on[i]) ids.push_back(static_cast<Index>(i));
  }
  return ids;
}

// ---------------------------------------------------------------------------

WaveOperator::WaveOperator(const TetMesh& mesh, const PermittivityField& eps, double s)
    : mesh_(&mesh), s_(s) {
  require_same_mesh(eps.mesh_id, mesh, "WaveOperator: permittivity");
  if (eps.values.size() != mesh.num_vertices()) throw MismatchError("WaveOperator: eps size mismatch");
  if (!(s >= 1.0)) throw ConfigError("WaveOperator: gauge parameter s must be >= 1");
  mass_ = lumped_mass(mesh, eps.values);
  eps_centroid_.resize(mesh.num_tets());
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    const auto& t = mesh.tet(k);
    eps_centroid_[k] = 0.25 * (eps.values[t[0]] + eps.values[t[1]] + eps.values[t[2]] + eps.values[t[3]]);
  }
}

void WaveOperator::apply(std::span<const double> v, std::span<double> out) const {
  const TetMesh& mesh = *mesh_;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    const auto& t = mesh.tet(k);
    const double vol = mesh.volume(k);
    Tensor3 g{};
    double div = 0.0;
    for (int b = 0; b < 4; ++b) {
      const Vec3& gb = mesh.grad_hat(k, b);
      const double* vb = &v[3 * static_cast<std::size_t>(t[b])];
      for (int c = 0; c < 3; ++c) {
        g[c][0] += vb[c] * gb[0];
        g[c][1] += vb[c] * gb[1];
        g[c][2] += vb[c] * gb[2];
        div += vb[c] * gb[c];
      }
    }
    const double dcoef = vol * (s_ * eps_centroid_[k] - 1.0) * div;
    for (int a = 0; a < 4; ++a) {
      const Vec3& ga = mesh.grad_hat(k, a);
      double* oa = &out[3 * static_cast<std::size_t>(t[a])];
      for (int c = 0; c < 3; ++c) oa[c] += vol * dot(ga, g[c]) + dcoef * ga[c];
    }
  }
}

// ---------------------------------------------------------------------------

Tensor3 element_gradient(const TetMesh& mesh, std::size_t k, std::span<const double> v) {
  Tensor3 g{};
  const auto& t = mesh.tet(k);
  for (int b = 0; b < 4; ++b) {
    const Vec3& gb = mesh.grad_hat(k, b);
    for (int c = 0; c < 3; ++c) {
      const double val = v[3 * static_cast<std::size_t>(t[b]) + c];
      for (int d = 0; d < 3; ++d) g[c][d] += val * gb[d];
    }
  }
  return g;
}

double element_divergence(const TetMesh& mesh, std::size_t k, std::span<const double> v) {
  double div = 0.0;
  const auto& t = mesh.tet(k);
  for (int b = 0; b < 4; ++b) {
    const Vec3& gb = mesh.grad_hat(k, b);
    for (int c = 0; c < 3; ++c) div += v[3 * static_cast<std::size_t>(t[b]) + c] * gb[c];
  }
  return div;
}

Vec3 element_mean(const TetMesh& mesh, std::size_t k, std::span<const double> v) {
  Vec3 m{};
  for (Index i : mesh.tet(k)) {
    for (int c = 0; c < 3; ++c) m[c] += 0.25 * v[3 * static_cast<std::size_t>(i) + c];
  }
  return m;
}

std::vector<double> face_jump_normal(const TetMesh& mesh, std::span<const Vec3> q) {
  if (q.size() != mesh.num_tets()) throw MismatchError("face_jump_normal: one value per tet expected");
  std::vector<double> out(mesh.num_tets(), 0.0);
  for (const auto& f : mesh.faces()) {
    if (f.is_boundary()) continue;
    const double j = std::abs(dot(q[f.owner] - q[f.neighbor], f.normal));
    out[f.owner] = std::max(out[f.owner], j);
    out[f.neighbor] = std::max(out[f.neighbor], j);
  }
  return out;
}

std::vector<double> face_jump_normal(const TetMesh& mesh, std::span<const Tensor3> g) {
  if (g.size() != mesh.num_tets()) throw MismatchError("face_jump_normal: one value per tet expected");
  std::vector<double> out(mesh.num_tets(), 0.0);
  for (const auto& f : mesh.faces()) {
    if (f.is_boundary()) continue;
    Vec3 jump{};
    for (int c = 0; c < 3; ++c) jump[c] = dot(g[f.owner][c] - g[f.neighbor][c], f.normal);
    const double j = norm(jump);
    out[f.owner] = std::max(out[f.owner], j);
    out[f.neighbor] = std::max(out[f.neighbor], j);
  }
  return out;
}

TimeJumps time_jump(std::span<const std::vector<double>> levels, double dt, int components) {
  if (levels.size() < 2) throw SizeError("time_jump: need at least two time levels");
  if (components < 1) throw ConfigError("time_jump: components must be positive");
  const std::size_t nodes = levels.size();
  const std::size_t n = levels[0].size() / static_cast<std::size_t>(components);
  for (const auto& l : levels) {
    if (l.size() != levels[0].size()) throw MismatchError("time_jump: levels differ in size");
  }
  TimeJumps out;
  out.node.assign(nodes, std::vector<double>(n, 0.0));
  for (std::size_t k = 1; k + 1 < nodes; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (int c = 0; c < components; ++c) {
        const std::size_t idx = i * components + c;
        const double fwd = (levels[k + 1][idx] - levels[k][idx]) / dt;
        const double bwd = (levels[k][idx] - levels[k - 1][idx]) / dt;
        s += (fwd - bwd) * (fwd - bwd);
      }
      out.node[k][i] = std::sqrt(s);
    }
  }
  out.interval.assign(nodes - 1, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k + 1 < nodes; ++k) {
    for (std::size_t i = 0; i < n; ++i) out.interval[k][i] = std::max(out.node[k][i], out.node[k + 1][i]);
  }
  return out;
}

}  // namespace afem
