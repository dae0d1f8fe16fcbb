#include <doctest.h>

#include <cmath>
#include <limits>

#include "afem/adaptivity.hpp"
#include "afem/error.hpp"
#include "oracles.hpp"

using namespace afem;

namespace {

const Box kOuter{{-0.8, -0.8, -0.8}, {0.8, 0.8, 0.8}};
const Box kInner{{-0.4, -0.4, -0.4}, {0.4, 0.4, 0.4}};

/// Ball of radius 0.25 at (0.1, 0, 0) with eps = 2, sampled at the vertices.
PermittivityField ball(const TetMesh& mesh, double contrast) {
  std::vector<double> v(mesh.num_vertices(), 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec3 d = mesh.vertex(i) - Vec3{0.1, 0.0, 0.0};
    if (norm(d) < 0.25) v[i] = contrast;
  }
  return project_admissible(v, mesh, 5.0);
}

AdaptiveProblem ball_problem(double contrast) {
  AdaptiveProblem p;
  SourceSpec src;
  src.omega = 6.0;
  src.amplitude = 2.0;
  p.sources = {src};
  p.wave.observed = {BoundarySide::front, BoundarySide::back};
  p.t_final = 2.0;
  p.delta = 0.2;
  p.cg.max_iter = 3;
  p.adaptive.max_levels = 2;
  p.data = [contrast, src, wave = p.wave](const TetMesh& mesh, const TimeGrid& grid) {
    return std::vector<BoundaryObservation>{solve_direct(mesh, ball(mesh, contrast), src, grid, wave).observation};
  };
  return p;
}

}  // namespace

TEST_CASE("level grid") {
  const auto mesh = build_uniform_mesh(kOuter, 0.2, kInner);
  const double cfl = cfl_max_step(mesh, 5.0);
  CHECK(cfl == doctest::Approx(0.5 * 0.2 * std::sqrt(3.0) / std::sqrt(15.0)));
  const auto g = level_grid(mesh, 2.0, 0.0, 5.0);
  CHECK(g.dt <= cfl);
  CHECK(g.dt * static_cast<double>(g.n_steps) == doctest::Approx(2.0));
  CHECK(g.n_steps == static_cast<std::size_t>(std::ceil(2.0 / cfl)));
  const auto capped = level_grid(mesh, 2.0, 0.01, 5.0);
  CHECK(capped.dt <= 0.01);
  CHECK(capped.n_steps == 200);
}

TEST_CASE("names") {
  CHECK(variant_from_string("second") == Variant::second);
  CHECK(std::string(to_string(Variant::first)) == "first");
  CHECK_THROWS_AS(variant_from_string("third"), ConfigError);
  CHECK(std::string(to_string(AdaptiveStop::nothing_to_refine)) == "nothing_to_refine");
}

TEST_CASE("input checks") {
  const auto mesh = build_uniform_mesh(kOuter, 0.4, kInner);
  auto p = ball_problem(2.0);
  p.adaptive.beta = 1.0;
  CHECK_THROWS_AS(run_adaptive(mesh, p), ConfigError);
  p = ball_problem(2.0);
  p.data = nullptr;
  CHECK_THROWS_AS(run_adaptive(mesh, p), ConfigError);
  p = ball_problem(2.0);
  p.adaptive.max_levels = -1;
  CHECK_THROWS_AS(run_adaptive(mesh, p), ConfigError);
}

TEST_CASE("infinite theta1 keeps the initial mesh") {
  const auto mesh = build_uniform_mesh(kOuter, 0.2, kInner);
  auto p = ball_problem(2.0);
  p.adaptive.theta1 = std::numeric_limits<double>::infinity();
  const auto run = run_adaptive(mesh, p);
  CHECK(run.k_rec == 0);
  CHECK(run.stop == AdaptiveStop::eps_change_tol);
  CHECK(run.meshes.size() == 1);
  CHECK(run.records.size() == 1);
  CHECK(run.mesh_rec().num_tets() == mesh.num_tets());
}

TEST_CASE("consistent data stops on the gradient") {
  const auto mesh = build_uniform_mesh(kOuter, 0.2, kInner);
  auto p = ball_problem(1.0);
  p.adaptive.theta2 = 1e-8;
  const auto run = run_adaptive(mesh, p);
  CHECK(run.k_rec == 0);
  CHECK(run.stop == AdaptiveStop::gradient_tol);
  for (double v : run.eps_rec().values) CHECK(v == 1.0);
}

TEST_CASE("refinement loop") {
  const auto mesh = build_uniform_mesh(kOuter, 0.2, kInner);
  const auto p = ball_problem(2.0);
  const auto run = run_adaptive(mesh, p);
  REQUIRE(run.meshes.size() == 3);
  CHECK(run.k_rec == 2);
  CHECK(run.stop == AdaptiveStop::max_levels);
  CHECK(run.records.size() == 3);
  CHECK(run.indicators.size() == 3);
  CHECK(run.markings.size() == 3);
  CHECK(run.warnings.empty());
  for (std::size_t k = 0; k < run.meshes.size(); ++k) {
    CAPTURE(k);
    const auto& m = run.meshes[k];
    const auto& rec = run.records[k];
    CHECK(rec.level == static_cast<int>(k));
    CHECK(rec.elements == m.num_tets());
    CHECK(rec.dt <= cfl_max_step(m, p.cg.eps_max) * (1.0 + 1e-12));
    CHECK(rec.dt * static_cast<double>(rec.steps) == doctest::Approx(p.t_final));
    CHECK(is_admissible(run.eps_per_level[k], m, p.cg.eps_max));
    CHECK(run.indicators[k].kind == IndicatorKind::residual);
    CHECK(run.histories[k].size() == static_cast<std::size_t>(rec.cg_iterations) + 1);
    if (k + 1 < run.meshes.size()) {
      // nested: refinement keeps old vertices in place and grows the mesh
      const auto& next = run.meshes[k + 1];
      CHECK(next.num_tets() > m.num_tets());
      CHECK(rec.marked == run.markings[k].marked.size());
      CHECK(rec.marked > 0);
      for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(next.vertex(i) == m.vertex(i));
      CHECK(run.records[k + 1].dt <= rec.dt);
    }
  }
  CHECK(run.markings.back().marked.empty());

  // the interpolated previous level is admissible on the new mesh
  const auto moved = interpolate_nodal(run.eps_per_level[0].values, run.meshes[0], run.meshes[1]);
  CHECK(is_admissible(project_admissible(moved, run.meshes[1], 5.0), run.meshes[1], 5.0));

  // reproducible
  const auto again = run_adaptive(mesh, p);
  REQUIRE(again.meshes.size() == run.meshes.size());
  for (std::size_t k = 0; k < run.meshes.size(); ++k) {
    CHECK(again.meshes[k].tets() == run.meshes[k].tets());
    CHECK(again.eps_per_level[k].values == run.eps_per_level[k].values);
    CHECK(again.records[k].final_grad_norm == run.records[k].final_grad_norm);
  }
}

TEST_CASE("second variant marks by the coefficient") {
  const auto mesh = build_uniform_mesh(kOuter, 0.2, kInner);
  auto p = ball_problem(2.0);
  p.adaptive.variant = Variant::second;
  p.adaptive.max_levels = 1;
  p.adaptive.beta_tilde = 0.9;
  p.adaptive.shifted_coefficient = true;
  const auto run = run_adaptive(mesh, p);
  REQUIRE(run.meshes.size() == 2);
  const auto& ind = run.indicators[0];
  CHECK(ind.kind == IndicatorKind::coefficient);
  const auto ref = coefficient_indicator(run.eps_per_level[0], run.meshes[0], true);
  CHECK(ind.values == ref.values);
  CHECK(run.markings[0].marked == mark_elements(ref, 0.9).marked);
  CHECK(run.meshes[1].num_tets() > mesh.num_tets());
}

TEST_CASE("vanishing indicator stops with a warning") {
  // consistent data, eps0 everywhere: the coefficient indicator shifted by 1 is zero
  const auto mesh = build_uniform_mesh(kOuter, 0.4, kInner);
  auto p = ball_problem(1.0);
  p.adaptive.variant = Variant::second;
  p.adaptive.shifted_coefficient = true;
  const auto run = run_adaptive(mesh, p);
  CHECK(run.stop == AdaptiveStop::nothing_to_refine);
  CHECK(run.k_rec == 0);
  CHECK(run.warnings.size() == 1);
}
