#include "afem/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "afem/error.hpp"

namespace afem {

const char* to_string(Variant v) { return v == Variant::first ? "first" : "second"; }

Variant variant_from_string(const std::string& name) {
  if (name == "first") return Variant::first;
  if (name == "second") return Variant::second;
  throw ConfigError("unknown adaptive variant '" + name + "'");
}

const char* to_string(AdaptiveStop stop) {
  switch (stop) {
    case AdaptiveStop::gradient_tol: return "gradient_tol";
    case AdaptiveStop::eps_change_tol: return "eps_change_tol";
    case AdaptiveStop::max_levels: return "max_levels";
    case AdaptiveStop::nothing_to_refine: return "nothing_to_refine";
  }
  return "unknown";
}

TimeGrid level_grid(const TetMesh& mesh, double t_final, double dt_max, double eps_max) {
  double dt = cfl_max_step(mesh, eps_max);
  if (dt_max > 0.0) dt = std::min(dt, dt_max);
  return TimeGrid::with_max_step(t_final, dt);
}

AdaptiveRun run_adaptive(const TetMesh& initial, const AdaptiveProblem& problem) {
  const auto& ad = problem.adaptive;
  if (!problem.data) throw ConfigError("run_adaptive: no data provider");
  if (ad.max_levels < 0) throw ConfigError("run_adaptive: max_levels must be nonnegative");
  if (!(ad.beta > 0.0 && ad.beta < 1.0) || !(ad.beta_tilde > 0.0 && ad.beta_tilde < 1.0)) {
    throw ConfigError("run_adaptive: beta values must lie in (0, 1)");
  }
  using clock = std::chrono::steady_clock;

  AdaptiveRun run;
  TetMesh mesh = initial;
  double dt_bound = problem.dt_max;
  std::vector<double> prev_eps;  // eps of the previous level on its own mesh

  for (int level = 0;; ++level) {
    const auto t0 = clock::now();
    const TimeGrid grid = level_grid(mesh, problem.t_final, dt_bound, problem.cg.eps_max);
    dt_bound = grid.dt;

    InverseProblem ip;
    ip.sources = problem.sources;
    ip.grid = grid;
    ip.wave = problem.wave;
    ip.wave.eps_max = problem.cg.eps_max;
    ip.params.alpha = problem.alpha;
    ip.params.delta = problem.delta;
    ip.params.s = problem.wave.s;
    ip.params.eps0 = project_admissible(std::vector<double>(mesh.num_vertices(), problem.eps0), mesh,
                                        problem.cg.eps_max);
    ip.data = problem.data(mesh, grid);

    PermittivityField eps_init = ip.params.eps0;
    if (level > 0) {
      const auto moved = interpolate_nodal(prev_eps, run.meshes.back(), mesh);
      eps_init = project_admissible(moved, mesh, problem.cg.eps_max);
    }

    CgState cg = run_cg(mesh, eps_init, ip, problem.cg);

    const auto w = domain_weights(mesh);
    std::vector<double> diff(mesh.num_vertices());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = cg.eps.values[i] - eps_init.values[i];

    LevelRecord rec;
    rec.level = level;
    rec.elements = mesh.num_tets();
    rec.vertices = mesh.num_vertices();
    rec.steps = grid.n_steps;
    rec.dt = grid.dt;
    rec.eps_change = weighted_norm(w, diff);
    rec.final_grad_norm = cg.last.gradient_norm;
    rec.min_grad_norm = cg.min_grad_norm;
    rec.cg_iterations = cg.iter;
    rec.cg_stop = cg.stop;
    rec.eps_peak = *std::max_element(cg.eps.values.begin(), cg.eps.values.end());

    ElementIndicator ind = ad.variant == Variant::first
                               ? residual_indicator(mesh, cg.last.direct, cg.last.adjoint, cg.eps, ip.params)
                               : coefficient_indicator(cg.eps, mesh, ad.shifted_coefficient);
    rec.indicator_max = ind.max;

    run.meshes.push_back(mesh);
    run.eps_per_level.push_back(cg.eps);
    run.histories.push_back(cg.history);
    run.k_rec = level;
    prev_eps = cg.eps.values;

    bool stop = true;
    if (cg.min_grad_norm < ad.theta2) {
      run.stop = AdaptiveStop::gradient_tol;
    } else if (rec.eps_change < ad.theta1) {
      run.stop = AdaptiveStop::eps_change_tol;
    } else if (level >= ad.max_levels) {
      run.stop = AdaptiveStop::max_levels;
    } else {
      stop = false;
    }

    Marking marking;
    if (!stop) {
      marking = mark_elements(ind, ad.variant == Variant::first ? ad.beta : ad.beta_tilde);
      rec.marked = marking.marked.size();
      if (marking.nothing_to_refine) {
        run.warnings.push_back("level " + std::to_string(level) + ": indicator vanishes, nothing to refine");
        run.stop = AdaptiveStop::nothing_to_refine;
        stop = true;
      }
    }
    run.indicators.push_back(std::move(ind));
    run.markings.push_back(marking);
    rec.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    run.records.push_back(rec);
    if (stop) break;

    mesh = refine(mesh, marking.marked);
  }
  return run;
}

}  // namespace afem
