#include "afem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>

#include "afem/error.hpp"

namespace afem {

namespace {

std::atomic<std::uint64_t> next_mesh_id{1};

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return dot(b - a, cross(c - a, d - a)) / 6.0;
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

// Local edge numbering used by refinement: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3).
constexpr std::array<std::array<int, 2>, 6> kEdges{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
// Edge masks of the faces opposite local vertex 0..3.
constexpr std::array<unsigned, 4> kFaceMasks{0b111000u, 0b100110u, 0b010101u, 0b001011u};

std::uint64_t edge_key(Index a, Index b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

bool Box::contains(const Vec3& p, double tol) const {
  for (int d = 0; d < 3; ++d) {
    if (p[d] < lo[d] - tol || p[d] > hi[d] + tol) return false;
  }
  return true;
}

bool Box::strictly_contains(const Vec3& p, double tol) const {
  for (int d = 0; d < 3; ++d) {
    if (p[d] <= lo[d] + tol || p[d] >= hi[d] - tol) return false;
  }
  return true;
}

double Box::volume() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2]); }

double Box::surface_area() const {
  const double a = hi[0] - lo[0], b = hi[1] - lo[1], c = hi[2] - lo[2];
  return 2.0 * (a * b + b * c + a * c);
}

const char* to_string(BoundarySide side) {
  switch (side) {
    case BoundarySide::front: return "front";
    case BoundarySide::back: return "back";
    case BoundarySide::lateral: return "lateral";
  }
  return "?";
}

BoundarySide boundary_side_from_string(const std::string& name) {
  if (name == "front") return BoundarySide::front;
  if (name == "back") return BoundarySide::back;
  if (name == "lateral") return BoundarySide::lateral;
  throw ConfigError("unknown boundary side '" + name + "' (expected front, back or lateral)");
}

// ---------------------------------------------------------------------------
// TetMesh

TetMesh::TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets, std::vector<int> levels,
                 Box outer, Box inner)
    : vertices_(std::move(vertices)),
      tets_(std::move(tets)),
      levels_(std::move(levels)),
      outer_(outer),
      inner_(inner),
      id_(next_mesh_id.fetch_add(1)) {
  if (levels_.size() != tets_.size()) throw SizeError("TetMesh: levels/tets size mismatch");
  const auto nv = static_cast<Index>(vertices_.size());
  for (const auto& t : tets_) {
    for (Index v : t) {
      if (v < 0 || v >= nv) throw GeometryError("TetMesh: vertex index out of range");
    }
  }
  compute_geometry();
  build_faces();
}

void TetMesh::compute_geometry() {
  const std::size_t nt = tets_.size();
  volumes_.resize(nt);
  grads_.resize(nt);
  diameters_.resize(nt);
  inner_tet_.assign(nt, 0);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& t = tets_[k];
    const Vec3& x0 = vertices_[t[0]];
    const Vec3 e1 = vertices_[t[1]] - x0;
    const Vec3 e2 = vertices_[t[2]] - x0;
    const Vec3 e3 = vertices_[t[3]] - x0;
    const double det = dot(e1, cross(e2, e3));
    if (!(det > 0.0)) {
      throw GeometryError("TetMesh: tet " + std::to_string(k) + " has non-positive volume");
    }
    volumes_[k] = det / 6.0;
    auto& g = grads_[k];
    g[1] = (1.0 / det) * cross(e2, e3);
    g[2] = (1.0 / det) * cross(e3, e1);
    g[3] = (1.0 / det) * cross(e1, e2);
    g[0] = -1.0 * (g[1] + g[2] + g[3]);
    double diam = 0.0;
    for (const auto& [a, b] : kEdges) {
      diam = std::max(diam, norm(vertices_[t[a]] - vertices_[t[b]]));
    }
    diameters_[k] = diam;
    inner_tet_[k] = inner_.contains(centroid(k)) ? 1 : 0;
  }
  free_mask_.resize(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const auto& p = vertices_[i];
    free_mask_[i] = (inner_.strictly_contains(p) && outer_.strictly_contains(p)) ? 1 : 0;
  }
}

void TetMesh::build_faces() {
  struct Entry {
    std::array<Index, 3> key;
    Index tet;
    int local;
  };
  std::vector<Entry> entries;
  entries.reserve(4 * tets_.size());
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    for (int i = 0; i < 4; ++i) {
      std::array<Index, 3> key{};
      int n = 0;
      for (int j = 0; j < 4; ++j) {
        if (j != i) key[n++] = tets_[k][j];
      }
      std::sort(key.begin(), key.end());
      entries.push_back({key, static_cast<Index>(k), i});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.key, a.tet) < std::tie(b.key, b.tet);
  });

  tet_faces_.assign(tets_.size(), {kNoNeighbor, kNoNeighbor, kNoNeighbor, kNoNeighbor});
  faces_.clear();
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].key == entries[i].key) ++j;
    if (j - i > 2) throw GeometryError("TetMesh: face shared by more than two tets");
    Face f;
    f.owner = entries[i].tet;
    f.neighbor = (j - i == 2) ? entries[i + 1].tet : kNoNeighbor;
    // Orient so that the normal leaves the owner.
    const auto& t = tets_[f.owner];
    const int opposite = entries[i].local;
    f.v = entries[i].key;
    const Vec3& a = vertices_[f.v[0]];
    Vec3 n = cross(vertices_[f.v[1]] - a, vertices_[f.v[2]] - a);
    if (dot(n, vertices_[t[opposite]] - a) > 0.0) {
      std::swap(f.v[1], f.v[2]);
      n = -1.0 * n;
    }
    const double len = norm(n);
    f.area = 0.5 * len;
    f.normal = (1.0 / len) * n;
    const auto fi = static_cast<Index>(faces_.size());
    tet_faces_[entries[i].tet][entries[i].local] = fi;
    if (f.neighbor != kNoNeighbor) tet_faces_[entries[i + 1].tet][entries[i + 1].local] = fi;
    faces_.push_back(f);
    i = j;
  }

  sides_.assign(faces_.size(), BoundarySide::lateral);
  boundary_faces_.clear();
  const double scale = norm(outer_.hi - outer_.lo);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    if (!faces_[f].is_boundary()) continue;
    boundary_faces_.push_back(static_cast<Index>(f));
    bool front = true, back = true;
    for (Index v : faces_[f].v) {
      front = front && near(vertices_[v][2], outer_.lo[2], scale);
      back = back && near(vertices_[v][2], outer_.hi[2], scale);
    }
    sides_[f] = front ? BoundarySide::front : (back ? BoundarySide::back : BoundarySide::lateral);
  }
}

Vec3 TetMesh::centroid(std::size_t k) const {
  const auto& t = tets_[k];
  return 0.25 * (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]] + vertices_[t[3]]);
}

double TetMesh::total_volume() const {
  return std::accumulate(volumes_.begin(), volumes_.end(), 0.0);
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid TimeGrid::uniform(double t_final, std::size_t n_steps) {
  if (!(t_final > 0.0)) throw ConfigError("TimeGrid: final time must be positive");
  if (n_steps == 0) throw ConfigError("TimeGrid: need at least one step");
  return TimeGrid{t_final, n_steps, t_final / static_cast<double>(n_steps)};
}

TimeGrid TimeGrid::with_max_step(double t_final, double max_dt) {
  if (!(max_dt > 0.0)) throw ConfigError("TimeGrid: maximal step must be positive");
  const double ratio = t_final / max_dt;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-10 * ratio));
  return uniform(t_final, std::max<std::size_t>(n, 1));
}

// ---------------------------------------------------------------------------
// Structured generation

TetMesh build_uniform_mesh(const Box& bounds, double h0) { return build_uniform_mesh(bounds, h0, bounds); }

TetMesh build_uniform_mesh(const Box& bounds, double h0, const Box& inner) {
  if (!(h0 > 0.0)) throw ConfigError("build_uniform_mesh: h0 must be positive");
  static constexpr const char* kAxis[3] = {"x1", "x2", "x3"};
  std::array<std::size_t, 3> n{};
  for (int d = 0; d < 3; ++d) {
    const double len = bounds.hi[d] - bounds.lo[d];
    if (!(len > 0.0)) throw ConfigError(std::string("build_uniform_mesh: empty extent along ") + kAxis[d]);
    const double cells = len / h0;
    const double rounded = std::round(cells);
    if (rounded < 1.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells)) {
      throw ConfigError(std::string("build_uniform_mesh: extent along ") + kAxis[d] +
                        " is not an integer multiple of h0");
    }
    n[d] = static_cast<std::size_t>(rounded);
  }
  for (int d = 0; d < 3; ++d) {
    if (inner.lo[d] < bounds.lo[d] - 1e-12 || inner.hi[d] > bounds.hi[d] + 1e-12 || inner.lo[d] >= inner.hi[d]) {
      throw ConfigError(std::string("build_uniform_mesh: inner box outside outer box along ") + kAxis[d]);
    }
  }

  const std::size_t nx = n[0] + 1, ny = n[1] + 1, nz = n[2] + 1;
  std::vector<Vec3> vertices;
  vertices.reserve(nx * ny * nz);
  for (std::size_t k = 0; k < nz; ++k) {
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        auto coord = [&](int d, std::size_t c) {
          return c == n[d] ? bounds.hi[d] : bounds.lo[d] + h0 * static_cast<double>(c);
        };
        vertices.push_back({coord(0, i), coord(1, j), coord(2, k)});
      }
    }
  }
  auto vid = [&](std::size_t i, std::size_t j, std::size_t k) {
    return static_cast<Index>(i + nx * (j + ny * k));
  };

  // Kuhn split: each tet follows a monotone path from corner 000 to 111.
  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<Tet> tets;
  tets.reserve(6 * n[0] * n[1] * n[2]);
  for (std::size_t k = 0; k < n[2]; ++k) {
    for (std::size_t j = 0; j < n[1]; ++j) {
      for (std::size_t i = 0; i < n[0]; ++i) {
        for (const auto& perm : kPerms) {
          std::array<std::size_t, 3> c{i, j, k};
          Tet t{};
          t[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            t[s + 1] = vid(c[0], c[1], c[2]);
          }
          if (signed_volume(vertices[t[0]], vertices[t[1]], vertices[t[2]], vertices[t[3]]) < 0.0) {
            std::swap(t[2], t[3]);
          }
          tets.push_back(t);
        }
      }
    }
  }
  std::vector<int> levels(tets.size(), 0);
  return TetMesh(std::move(vertices), std::move(tets), std::move(levels), bounds, inner);
}

std::vector<double> mesh_function(const TetMesh& mesh) {
  std::vector<double> h(mesh.num_tets());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = mesh.diameter(k);
  return h;
}

// ---------------------------------------------------------------------------
// Refinement

namespace {

unsigned close_pattern(unsigned mask) {
  const int count = std::popcount(mask);
  if (count <= 1 || count == 6) return mask;
  for (unsigned face : kFaceMasks) {
    if ((mask & ~face) == 0u) return face;  // two or three edges of one face
  }
  return 0b111111u;
}

void push_oriented(std::vector<Tet>& out, const std::vector<Vec3>& x, Tet t) {
  if (signed_volume(x[t[0]], x[t[1]], x[t[2]], x[t[3]]) < 0.0) std::swap(t[2], t[3]);
  out.push_back(t);
}

}  // namespace

TetMesh refine(const TetMesh& mesh, std::span<const std::size_t> marked) {
  if (marked.empty()) return mesh;
  const std::size_t nt = mesh.num_tets();

  std::unordered_map<std::uint64_t, Index> edge_ids;
  std::vector<std::array<Index, 6>> tet_edges(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& t = mesh.tet(k);
    for (int e = 0; e < 6; ++e) {
      const auto key = edge_key(t[kEdges[e][0]], t[kEdges[e][1]]);
      auto [it, inserted] = edge_ids.try_emplace(key, static_cast<Index>(edge_ids.size()));
      tet_edges[k][e] = it->second;
    }
  }
  std::vector<std::uint8_t> edge_marked(edge_ids.size(), 0);
  for (std::size_t k : marked) {
    if (k >= nt) throw ConfigError("refine: marked tet index out of range");
    for (Index e : tet_edges[k]) edge_marked[e] = 1;
  }

  auto pattern = [&](std::size_t k) {
    unsigned mask = 0;
    for (int e = 0; e < 6; ++e) {
      if (edge_marked[tet_edges[k][e]]) mask |= 1u << e;
    }
    return mask;
  };

  // Closure: every tet must end up with 0, 1, 3 (one face) or 6 marked edges.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 0; k < nt; ++k) {
      const unsigned mask = pattern(k);
      const unsigned closed = close_pattern(mask);
      if (closed == mask) continue;
      for (int e = 0; e < 6; ++e) {
        if ((closed >> e) & 1u) edge_marked[tet_edges[k][e]] = 1;
      }
      changed = true;
    }
  }

  std::vector<Vec3> vertices = mesh.vertices();
  std::vector<Index> midpoint(edge_ids.size(), kNoNeighbor);
  std::vector<Tet> tets;
  std::vector<int> levels;
  tets.reserve(nt * 2);
  levels.reserve(nt * 2);

  for (std::size_t k = 0; k < nt; ++k) {
    const auto& t = mesh.tet(k);
    const unsigned mask = pattern(k);
    if (mask == 0u) {
      tets.push_back(t);
      levels.push_back(mesh.levels()[k]);
      continue;
    }
    std::array<Index, 6> m{};
    for (int e = 0; e < 6; ++e) {
      if (!((mask >> e) & 1u)) {
        m[e] = kNoNeighbor;
        continue;
      }
      Index& mid = midpoint[tet_edges[k][e]];
      if (mid == kNoNeighbor) {
        mid = static_cast<Index>(vertices.size());
        vertices.push_back(afem::midpoint(mesh.vertex(t[kEdges[e][0]]), mesh.vertex(t[kEdges[e][1]])));
      }
      m[e] = mid;
    }
    const int count = std::popcount(mask);
    if (count == 1) {
      const int e = std::countr_zero(mask);
      const int a = kEdges[e][0], b = kEdges[e][1];
      Tet c1 = t, c2 = t;
      c1[b] = m[e];
      c2[a] = m[e];
      push_oriented(tets, vertices, c1);
      push_oriented(tets, vertices, c2);
    } else if (count == 3) {
      int apex = 0;
      for (int f = 0; f < 4; ++f) {
        if (kFaceMasks[f] == mask) apex = f;
      }
      std::array<int, 3> fv{};
      for (int j = 0, n = 0; j < 4; ++j) {
        if (j != apex) fv[n++] = j;
      }
      auto mid = [&](int a, int b) {
        for (int e = 0; e < 6; ++e) {
          if ((kEdges[e][0] == a && kEdges[e][1] == b) || (kEdges[e][0] == b && kEdges[e][1] == a)) return m[e];
        }
        return kNoNeighbor;
      };
      const Index a = t[fv[0]], b = t[fv[1]], c = t[fv[2]], d = t[apex];
      const Index mab = mid(fv[0], fv[1]), mac = mid(fv[0], fv[2]), mbc = mid(fv[1], fv[2]);
      push_oriented(tets, vertices, {a, mab, mac, d});
      push_oriented(tets, vertices, {mab, b, mbc, d});
      push_oriented(tets, vertices, {mac, mbc, c, d});
      push_oriented(tets, vertices, {mab, mbc, mac, d});
    } else {
      // Red: four corner tets plus the inner octahedron cut along its
      // shortest diagonal.
      const Index m01 = m[0], m02 = m[1], m03 = m[2], m12 = m[3], m13 = m[4], m23 = m[5];
      push_oriented(tets, vertices, {t[0], m01, m02, m03});
      push_oriented(tets, vertices, {m01, t[1], m12, m13});
      push_oriented(tets, vertices, {m02, m12, t[2], m23});
      push_oriented(tets, vertices, {m03, m13, m23, t[3]});
      struct Diagonal {
        Index p, q;
        std::array<Index, 4> ring;
      };
      const std::array<Diagonal, 3> diagonals{{{m01, m23, {m02, m03, m13, m12}},
                                               {m02, m13, {m01, m03, m23, m12}},
                                               {m03, m12, {m01, m02, m23, m13}}}};
      std::size_t best = 0;
      double best_len = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < diagonals.size(); ++i) {
        const double len = norm(vertices[diagonals[i].p] - vertices[diagonals[i].q]);
        if (len < best_len * (1.0 - 1e-12)) {
          best_len = len;
          best = i;
        }
      }
      const auto& dg = diagonals[best];
      for (int i = 0; i < 4; ++i) {
        push_oriented(tets, vertices, {dg.p, dg.q, dg.ring[i], dg.ring[(i + 1) % 4]});
      }
    }
    levels.resize(tets.size(), mesh.levels()[k] + 1);
  }
  return TetMesh(std::move(vertices), std::move(tets), std::move(levels), mesh.outer_box(), mesh.inner_box());
}

TetMesh refine_all(const TetMesh& mesh) {
  std::vector<std::size_t> all(mesh.num_tets());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return refine(mesh, all);
}

ConformityReport check_conformity(const TetMesh& mesh) {
  ConformityReport report;
  const Box& box = mesh.outer_box();
  const double scale = norm(box.hi - box.lo);
  double boundary_area = 0.0;
  for (Index f : mesh.boundary_faces()) {
    const auto& face = mesh.faces()[f];
    boundary_area += face.area;
    // A boundary face must lie in one of the six box planes.
    bool on_plane = false;
    for (int d = 0; d < 3 && !on_plane; ++d) {
      for (double plane : {box.lo[d], box.hi[d]}) {
        bool all = true;
        for (Index v : face.v) all = all && near(mesh.vertex(v)[d], plane, scale);
        on_plane = on_plane || all;
      }
    }
    if (!on_plane) report.conforming = false;
  }
  const double area_err = std::abs(boundary_area - box.surface_area()) / box.surface_area();
  report.watertight = area_err < 1e-10;
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    if (!(mesh.volume(k) > 0.0)) report.positive_orientation = false;
  }
  std::vector<std::uint8_t> used(mesh.num_vertices(), 0);
  for (const auto& t : mesh.tets()) {
    for (Index v : t) used[v] = 1;
  }
  report.all_vertices_used = std::all_of(used.begin(), used.end(), [](auto u) { return u != 0; });
  report.volume_error = std::abs(mesh.total_volume() - box.volume()) / box.volume();
  if (report.volume_error > 1e-12) report.conforming = false;
  return report;
}

// ---------------------------------------------------------------------------
// Point location and interpolation

std::array<double, 4> barycentric(const TetMesh& mesh, std::size_t k, const Vec3& p) {
  const auto& t = mesh.tet(k);
  const Vec3 r = p - mesh.vertex(t[0]);
  std::array<double, 4> w{};
  w[1] = dot(mesh.grad_hat(k, 1), r);
  w[2] = dot(mesh.grad_hat(k, 2), r);
  w[3] = dot(mesh.grad_hat(k, 3), r);
  w[0] = 1.0 - w[1] - w[2] - w[3];
  return w;
}

PointLocator::PointLocator(const TetMesh& mesh) : mesh_(&mesh) {
  const Box& box = mesh.outer_box();
  lo_ = box.lo;
  const double cell = 2.0 * std::cbrt(box.volume() / static_cast<double>(std::max<std::size_t>(mesh.num_tets(), 1)));
  for (int d = 0; d < 3; ++d) {
    const double len = box.hi[d] - box.lo[d];
    dims_[d] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / cell)));
    cell_[d] = len / static_cast<double>(dims_[d]);
  }
  const std::size_t ncells = dims_[0] * dims_[1] * dims_[2];
  auto cell_range = [&](std::size_t k) {
    std::array<std::size_t, 3> lo{}, hi{};
    const auto& t = mesh.tet(k);
    for (int d = 0; d < 3; ++d) {
      double mn = mesh.vertex(t[0])[d], mx = mn;
      for (int a = 1; a < 4; ++a) {
        mn = std::min(mn, mesh.vertex(t[a])[d]);
        mx = std::max(mx, mesh.vertex(t[a])[d]);
      }
      auto clamp = [&](double x) {
        const double c = std::floor((x - lo_[d]) / cell_[d]);
        return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(dims_[d] - 1)));
      };
      lo[d] = clamp(mn - 1e-9);
      hi[d] = clamp(mx + 1e-9);
    }
    return std::pair{lo, hi};
  };
  std::vector<std::size_t> counts(ncells + 1, 0);
  auto visit = [&](std::size_t k, auto&& fn) {
    auto [lo, hi] = cell_range(k);
    for (std::size_t z = lo[2]; z <= hi[2]; ++z)
      for (std::size_t y = lo[1]; y <= hi[1]; ++y)
        for (std::size_t x = lo[0]; x <= hi[0]; ++x) fn(x + dims_[0] * (y + dims_[1] * z));
  };
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) visit(k, [&](std::size_t c) { ++counts[c + 1]; });
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  offsets_ = counts;
  entries_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    visit(k, [&](std::size_t c) { entries_[fill[c]++] = static_cast<Index>(k); });
  }
}

PointLocator::Hit PointLocator::locate(const Vec3& p, double tol) const {
  std::array<std::size_t, 3> c{};
  for (int d = 0; d < 3; ++d) {
    const double x = std::floor((p[d] - lo_[d]) / cell_[d]);
    c[d] = static_cast<std::size_t>(std::clamp(x, 0.0, static_cast<double>(dims_[d] - 1)));
  }
  const std::size_t cell = c[0] + dims_[0] * (c[1] + dims_[1] * c[2]);
  Hit best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t i = offsets_[cell]; i < offsets_[cell + 1]; ++i) {
    const auto k = static_cast<std::size_t>(entries_[i]);
    const auto w = barycentric(*mesh_, k, p);
    const double wmin = *std::min_element(w.begin(), w.end());
    if (wmin > best_min) {
      best_min = wmin;
      best = Hit{k, w};
      if (wmin >= 0.0) break;
    }
  }
  if (best_min < -tol) {
    throw GeometryError("PointLocator: point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " +
                        std::to_string(p[2]) + ") is outside the mesh");
  }
  return best;
}

namespace {

template <int Components>
std::vector<double> interpolate_impl(std::span<const double> field, const TetMesh& a, const TetMesh& b) {
  if (field.size() != Components * a.num_vertices()) {
    throw MismatchError("interpolate_nodal: field size does not match source mesh");
  }
  std::vector<double> out(Components * b.num_vertices());
  const PointLocator locator(a);
  for (std::size_t i = 0; i < b.num_vertices(); ++i) {
    const auto hit = locator.locate(b.vertex(i));
    const auto& t = a.tet(hit.tet);
    const auto top = std::max_element(hit.weights.begin(), hit.weights.end());
    if (*top > 1.0 - 1e-12) {
      // Coincident vertex: copy exactly.
      const auto src = static_cast<std::size_t>(t[top - hit.weights.begin()]);
      for (int c = 0; c < Components; ++c) out[Components * i + c] = field[Components * src + c];
      continue;
    }
    for (int c = 0; c < Components; ++c) {
      double v = 0.0;
      for (int j = 0; j < 4; ++j) v += hit.weights[j] * field[Components * static_cast<std::size_t>(t[j]) + c];
      out[Components * i + c] = v;
    }
  }
  return out;
}

}  // namespace

std::vector<double> interpolate_nodal(std::span<const double> field, const TetMesh& mesh_a, const TetMesh& mesh_b) {
  return interpolate_impl<1>(field, mesh_a, mesh_b);
}

std::vector<double> interpolate_nodal_vector(std::span<const double> field, const TetMesh& mesh_a,
                                             const TetMesh& mesh_b) {
  return interpolate_impl<3>(field, mesh_a, mesh_b);
}

}  // namespace afem
