#include <doctest.h>

#include <cmath>
#include <numeric>

#include "afem/discretization.hpp"
#include "afem/error.hpp"
#include "oracles.hpp"

using namespace afem;

namespace {

const Box kUnit{{0, 0, 0}, {1, 1, 1}};

std::vector<double> stiff(const WaveOperator& op, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  op.apply(v, out);
  return out;
}

double plain_dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

PermittivityField random_eps(const TetMesh& m, std::uint64_t seed) {
  PermittivityField e{m.id(), oracle::random_vector(m.num_vertices(), seed, 1.0, 5.0)};
  return e;
}

}  // namespace

TEST_CASE("stiffness matches dense assembly") {
  for (const auto& mesh : {oracle::jittered_cube(1), oracle::five_tet_cube(), oracle::two_tets()}) {
    for (double s : {1.0, 2.5}) {
      const auto eps = random_eps(mesh, 7);
      const WaveOperator op(mesh, eps, s);
      const auto K = oracle::dense_stiffness(mesh, eps.values, s);
      const std::size_t n = 3 * mesh.num_vertices();
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = 1.0;
        const auto col = stiff(op, e);
        for (std::size_t i = 0; i < n; ++i) CHECK(col[i] == doctest::Approx(K[i][j]).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("stiffness properties") {
  const auto mesh = build_uniform_mesh(kUnit, 0.5);
  const std::size_t n = 3 * mesh.num_vertices();
  SUBCASE("constants are in the kernel for any admissible eps") {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto eps = random_eps(mesh, seed);
      const WaveOperator op(mesh, eps, 1.0);
      std::vector<double> c(n);
      for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        c[3 * i] = 0.3;
        c[3 * i + 1] = -1.2;
        c[3 * i + 2] = 2.0;
      }
      for (double v : stiff(op, c)) CHECK(std::abs(v) < 1e-12);
    }
  }
  SUBCASE("symmetric for eps = 1 and for varying eps") {
    for (bool varying : {false, true}) {
      const auto eps = varying ? random_eps(mesh, 3) : constant_permittivity(mesh, 1.0);
      const WaveOperator op(mesh, eps, 1.0);
      const auto v = oracle::random_vector(n, 11), w = oracle::random_vector(n, 12);
      const double a = plain_dot(stiff(op, v), w), b = plain_dot(stiff(op, w), v);
      CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
  }
  SUBCASE("linear") {
    const auto eps = random_eps(mesh, 5);
    const WaveOperator op(mesh, eps, 1.0);
    const auto v = oracle::random_vector(n, 21), w = oracle::random_vector(n, 22);
    std::vector<double> comb(n);
    for (std::size_t i = 0; i < n; ++i) comb[i] = 2.0 * v[i] - 3.5 * w[i];
    const auto av = stiff(op, v), aw = stiff(op, w), ac = stiff(op, comb);
    double scale = 0.0;
    for (double x : ac) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ac[i] - (2.0 * av[i] - 3.5 * aw[i])) <= 1e-12 * scale);
  }
  SUBCASE("field on another mesh is rejected") {
    const auto other = build_uniform_mesh(kUnit, 1.0);
    CHECK_THROWS_AS(WaveOperator(mesh, constant_permittivity(other, 1.0), 1.0), MismatchError);
  }
}

TEST_CASE("lumped mass") {
  const auto mesh = build_uniform_mesh(kUnit, 0.5);
  const auto one = constant_permittivity(mesh, 1.0);
  const auto m1 = lumped_mass(mesh, one.values);
  CHECK(3.0 * std::accumulate(m1.begin(), m1.end(), 0.0) == doctest::Approx(3.0).epsilon(1e-14));
  for (double v : m1) CHECK(v > 0.0);

  const auto eps = random_eps(mesh, 8);
  const auto m = lumped_mass(mesh, eps.values);
  const auto ref = oracle::lumped_mass(mesh, eps.values);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] == doctest::Approx(ref[i]).epsilon(1e-13));

  // linear in eps (no bound checks in lumped_mass)
  std::vector<double> twice(eps.values);
  for (double& v : twice) v *= 2.0;
  const auto m2 = lumped_mass(mesh, twice);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(m2[i] == doctest::Approx(2.0 * m[i]).epsilon(1e-14));

  // the operator's mass is the same lumping
  const WaveOperator op(mesh, eps, 1.0);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(op.mass()[i] == doctest::Approx(m[i]).epsilon(1e-14));
}

TEST_CASE("admissibility") {
  const Box outer{{0, 0, 0}, {1.5, 1.5, 1.5}};
  const auto mesh = build_uniform_mesh(outer, 0.5);
  auto eps = constant_permittivity(mesh, 1.0);
  CHECK(is_admissible(eps, mesh, 5.0));
  std::size_t free = 0;
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    if (mesh.is_free_vertex(i)) {
      ++free;
      eps.values[i] = 4.0;
    }
  }
  CHECK(free == 8);
  CHECK(is_admissible(eps, mesh, 5.0));
  CHECK_FALSE(is_admissible(eps, mesh, 3.0));
  eps.values[0] = 2.0;  // a corner vertex is frozen
  CHECK_FALSE(is_admissible(eps, mesh, 5.0));
}

TEST_CASE("weights and products") {
  const Box outer{{0, 0, 0}, {2, 2, 2}};
  const Box inner{{0.5, 0.5, 0.5}, {1.5, 1.5, 1.5}};
  const auto mesh = build_uniform_mesh(outer, 0.5, inner);
  const auto w = domain_weights(mesh);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(inner.volume()).epsilon(1e-14));
  const auto front = boundary_weights(mesh, BoundarySide::front);
  CHECK(std::accumulate(front.begin(), front.end(), 0.0) == doctest::Approx(4.0).epsilon(1e-14));
  const std::vector<BoundarySide> both{BoundarySide::front, BoundarySide::back};
  const auto verts = boundary_vertices(mesh, both);
  CHECK(verts.size() == 2 * 25);
  CHECK(std::is_sorted(verts.begin(), verts.end()));
  const std::vector<double> a(w.size(), 2.0), b(w.size(), 3.0);
  CHECK(weighted_dot(w, a, b) == doctest::Approx(6.0 * inner.volume()));
  CHECK(weighted_norm(w, a) == doctest::Approx(2.0 * std::sqrt(inner.volume())));
}

TEST_CASE("element quantities") {
  const auto mesh = oracle::jittered_cube(4);
  const auto v = oracle::random_vector(3 * mesh.num_vertices(), 2);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    const auto g = element_gradient(mesh, k, v);
    const auto ref = oracle::grad_tensor(mesh, k, v);
    for (int c = 0; c < 3; ++c) {
      for (int d = 0; d < 3; ++d) CHECK(g[c][d] == doctest::Approx(ref[c][d]).epsilon(1e-12));
    }
    CHECK(element_divergence(mesh, k, v) == doctest::Approx(oracle::divergence(mesh, k, v)).epsilon(1e-12));
    const auto m = element_mean(mesh, k, v);
    const auto mr = oracle::mean(mesh, k, v);
    for (int c = 0; c < 3; ++c) CHECK(m[c] == doctest::Approx(mr[c]).epsilon(1e-14));
  }
}

TEST_CASE("face jumps") {
  SUBCASE("gradient of a global linear field has no jumps") {
    const auto mesh = build_uniform_mesh(kUnit, 0.5);
    std::vector<double> v(3 * mesh.num_vertices());
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
      const auto& x = mesh.vertex(i);
      v[3 * i] = 1.0 + 2.0 * x[0] - x[2];
      v[3 * i + 1] = 0.5 * x[1];
      v[3 * i + 2] = x[0] + x[1] + x[2];
    }
    std::vector<Tensor3> g(mesh.num_tets());
    for (std::size_t k = 0; k < mesh.num_tets(); ++k) g[k] = element_gradient(mesh, k, v);
    for (double j : face_jump_normal(mesh, std::span<const Tensor3>(g))) CHECK(j < 1e-12);
  }
  SUBCASE("two tets with opposite normal components") {
    const auto mesh = oracle::two_tets();
    const auto faces = oracle::interior_faces(mesh);
    REQUIRE(faces.size() == 1);
    const Vec3 n = faces[0].normal;
    const std::vector<Vec3> q{n, -1.0 * n};
    const auto j = face_jump_normal(mesh, std::span<const Vec3>(q));
    CHECK(j[0] == doctest::Approx(2.0));
    CHECK(j[1] == doctest::Approx(2.0));
  }
  SUBCASE("nonnegative and matches a pairwise search") {
    const auto mesh = oracle::five_tet_cube();
    const auto raw = oracle::random_vector(3 * mesh.num_tets(), 6);
    std::vector<Vec3> q(mesh.num_tets());
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = {raw[3 * k], raw[3 * k + 1], raw[3 * k + 2]};
    const auto j = face_jump_normal(mesh, std::span<const Vec3>(q));
    std::vector<double> ref(mesh.num_tets(), 0.0);
    for (const auto& f : oracle::interior_faces(mesh)) {
      const double x = std::abs(dot(q[f.a] - q[f.b], f.normal));
      ref[f.a] = std::max(ref[f.a], x);
      ref[f.b] = std::max(ref[f.b], x);
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
      CHECK(j[k] >= 0.0);
      CHECK(j[k] == doctest::Approx(ref[k]).epsilon(1e-13));
    }
  }
}

TEST_CASE("time jumps") {
  SUBCASE("linear in time") {
    std::vector<std::vector<double>> lv;
    for (int n = 0; n < 5; ++n) lv.push_back({1.0 + 0.5 * n, -2.0 * n});
    const auto tj = time_jump(lv, 0.1, 1);
    for (const auto& row : tj.interval) {
      for (double v : row) CHECK(v == doctest::Approx(0.0).scale(1.0));
    }
  }
  SUBCASE("values 0 0 1 with tau 1") {
    const std::vector<std::vector<double>> lv{{0.0}, {0.0}, {1.0}};
    const auto tj = time_jump(lv, 1.0, 1);
    CHECK(tj.node[0][0] == 0.0);
    CHECK(tj.node[1][0] == 1.0);
    CHECK(tj.node[2][0] == 0.0);
    CHECK(tj.interval[0][0] == 1.0);
    CHECK(tj.interval[1][0] == 1.0);
  }
  SUBCASE("single interval") {
    const std::vector<std::vector<double>> lv{{0.0, 3.0, 1.0}, {5.0, 1.0, 2.0}};
    const auto tj = time_jump(lv, 0.5, 3);
    CHECK(tj.interval[0][0] == 0.0);
  }
  SUBCASE("too few levels") {
    const std::vector<std::vector<double>> lv{{0.0}};
    CHECK_THROWS_AS(time_jump(lv, 1.0, 1), SizeError);
  }
}
