#include "afem/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "afem/error.hpp"

namespace afem {

namespace {

void require_compatible(const BoundaryObservation& a, const BoundaryObservation& b) {
  if (a.vertices != b.vertices || a.sides != b.sides) {
    throw MismatchError("observation records use different boundary vertices");
  }
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw MismatchError("observation records use different time grids");
  }
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    if (a.values[n].size() != b.values[n].size()) throw MismatchError("observation records differ in size");
  }
}

}  // namespace

BoundaryObservation weighted_residual(const BoundaryObservation& trace, const BoundaryObservation& data,
                                      double delta) {
  require_compatible(trace, data);
  BoundaryObservation out = trace;
  for (std::size_t n = 0; n < out.values.size(); ++n) {
    const double z = cutoff_zdelta(trace.grid.time(n), trace.grid.t_final, delta);
    const double z2 = z * z;
    auto& row = out.values[n];
    const auto& g = data.values[n];
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - g[j]) * z2;
  }
  return out;
}

double misfit_value(const TetMesh& mesh, const BoundaryObservation& trace, const BoundaryObservation& data,
                    double delta) {
  require_compatible(trace, data);
  require_same_mesh(trace.mesh_id, mesh, "misfit_value: trace");
  const auto a = observation_weights(mesh, trace);
  double total = 0.0;
  for (std::size_t n = 0; n < trace.values.size(); ++n) {
    const double z = cutoff_zdelta(trace.grid.time(n), trace.grid.t_final, delta);
    if (z == 0.0) continue;
    const auto& e = trace.values[n];
    const auto& g = data.values[n];
    double row = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = e[3 * j + c] - g[3 * j + c];
        d2 += d * d;
      }
      row += a[j] * d2;
    }
    total += trapezoid_weight(trace.grid, n) * z * z * row;
  }
  return 0.5 * total;
}

double regularization_value(const TetMesh& mesh, const PermittivityField& eps, const TikhonovParams& params) {
  require_same_mesh(eps.mesh_id, mesh, "regularization_value: eps");
  require_same_mesh(params.eps0.mesh_id, mesh, "regularization_value: eps0");
  const auto w = domain_weights(mesh);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = eps.values[i] - params.eps0.values[i];
    s += w[i] * d * d;
  }
  return 0.5 * params.alpha * s;
}

double tikhonov_value(const TetMesh& mesh, const PermittivityField& eps, const BoundaryObservation& trace,
                      const BoundaryObservation& data, const TikhonovParams& params) {
  return misfit_value(mesh, trace, data, params.delta) + regularization_value(mesh, eps, params);
}

std::vector<double> misfit_sensitivity(const TetMesh& mesh, const FieldTrajectory& direct,
                                       const FieldTrajectory& adjoint, double s) {
  require_same_mesh(direct.mesh_id, mesh, "misfit_sensitivity: direct trajectory");
  require_same_mesh(adjoint.mesh_id, mesh, "misfit_sensitivity: adjoint trajectory");
  if (!(direct.grid == adjoint.grid)) throw MismatchError("misfit_sensitivity: trajectories on different grids");
  const std::size_t nodes = direct.grid.num_nodes();
  if (direct.levels.size() != nodes || adjoint.levels.size() != nodes) {
    throw MismatchError("misfit_sensitivity: trajectories must store every time level");
  }
  const std::size_t nv = mesh.num_vertices();
  const double tau = direct.grid.dt;

  // q_i = -sum_intervals tau (d_t mu_i . d_t E_i)
  std::vector<double> q(nv, 0.0);
  for (std::size_t n = 0; n + 1 < nodes; ++n) {
    const auto& e0 = direct.levels[n];
    const auto& e1 = direct.levels[n + 1];
    const auto& m0 = adjoint.levels[n];
    const auto& m1 = adjoint.levels[n + 1];
    for (std::size_t i = 0; i < nv; ++i) {
      double d = 0.0;
      for (int c = 0; c < 3; ++c) {
        const std::size_t j = 3 * i + c;
        d += (m1[j] - m0[j]) * (e1[j] - e0[j]);
      }
      q[i] -= d / tau;
    }
  }

  // sum_n tau div E^n div mu^n per tet, n = 1..N-1
  std::vector<double> dd(mesh.num_tets(), 0.0);
  for (std::size_t n = 1; n + 1 < nodes; ++n) {
    for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
      dd[k] += tau * element_divergence(mesh, k, direct.levels[n]) * element_divergence(mesh, k, adjoint.levels[n]);
    }
  }

  std::vector<double> g(nv, 0.0);
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) {
    const auto& t = mesh.tet(k);
    const double vol = mesh.volume(k);
    const double qsum = q[t[0]] + q[t[1]] + q[t[2]] + q[t[3]];
    const double pen = s * 0.25 * vol * dd[k];
    for (int a = 0; a < 4; ++a) g[t[a]] += vol / 20.0 * (qsum + q[t[a]]) + pen;
  }
  return g;
}

GradientField to_gradient_field(const TetMesh& mesh, std::span<const double> raw) {
  if (raw.size() != mesh.num_vertices()) throw MismatchError("to_gradient_field: size mismatch");
  const auto w = domain_weights(mesh);
  GradientField r{mesh.id(), std::vector<double>(raw.size(), 0.0)};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (mesh.is_free_vertex(i) && w[i] > 0.0) r.values[i] = raw[i] / w[i];
  }
  return r;
}

namespace {

void add_regularization(const TetMesh& mesh, const PermittivityField& eps, const TikhonovParams& params,
                        std::vector<double>& raw) {
  require_same_mesh(params.eps0.mesh_id, mesh, "gradient: eps0");
  const auto w = domain_weights(mesh);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] += params.alpha * w[i] * (eps.values[i] - params.eps0.values[i]);
  }
}

}  // namespace

GradientField gradient_field(const TetMesh& mesh, const FieldTrajectory& direct, const FieldTrajectory& adjoint,
                             const PermittivityField& eps, const TikhonovParams& params) {
  require_same_mesh(eps.mesh_id, mesh, "gradient_field: eps");
  auto raw = misfit_sensitivity(mesh, direct, adjoint, params.s);
  add_regularization(mesh, eps, params, raw);
  return to_gradient_field(mesh, raw);
}

PermittivityField project_admissible(std::span<const double> values, const TetMesh& mesh, double eps_max) {
  if (values.size() != mesh.num_vertices()) throw MismatchError("project_admissible: size mismatch");
  PermittivityField out{mesh.id(), std::vector<double>(values.size(), 1.0)};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mesh.is_free_vertex(i)) out.values[i] = std::clamp(values[i], 1.0, eps_max);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_problem(const TetMesh& mesh, const InverseProblem& problem) {
  if (problem.sources.empty()) throw ConfigError("inverse problem without sources");
  if (problem.sources.size() != problem.data.size()) throw MismatchError("one data record per source expected");
  for (const auto& d : problem.data) {
    require_same_mesh(d.mesh_id, mesh, "inverse problem data");
    if (!(d.grid == problem.grid)) throw MismatchError("data sampled on a different time grid");
  }
}

WaveSettings settings_for(const InverseProblem& problem, std::size_t source, bool keep) {
  WaveSettings w = problem.wave;
  w.s = problem.params.s;
  w.observed = problem.data[source].sides;
  w.keep_trajectory = keep;
  return w;
}

}  // namespace

double evaluate_value(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem) {
  check_problem(mesh, problem);
  // same summation order as evaluate(), so the two agree bitwise
  const double reg = regularization_value(mesh, eps, problem.params);
  double misfit = 0.0;
  for (std::size_t src = 0; src < problem.sources.size(); ++src) {
    const auto sol = solve_direct(mesh, eps, problem.sources[src], problem.grid, settings_for(problem, src, false));
    misfit += misfit_value(mesh, sol.observation, problem.data[src], problem.params.delta);
  }
  return misfit + reg;
}

Evaluation evaluate(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem,
                    bool keep_trajectories) {
  check_problem(mesh, problem);
  Evaluation out;
  out.regularization = regularization_value(mesh, eps, problem.params);
  std::vector<double> raw(mesh.num_vertices(), 0.0);
  for (std::size_t src = 0; src < problem.sources.size(); ++src) {
    const auto settings = settings_for(problem, src, true);
    auto sol = solve_direct(mesh, eps, problem.sources[src], problem.grid, settings);
    out.misfit += misfit_value(mesh, sol.observation, problem.data[src], problem.params.delta);
    const auto residual = weighted_residual(sol.observation, problem.data[src], problem.params.delta);
    auto adj = solve_adjoint(mesh, eps, residual, problem.sources[src], problem.grid, settings);
    const auto part = misfit_sensitivity(mesh, sol.trajectory, adj, problem.params.s);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] += part[i];
    if (keep_trajectories) {
      out.direct.push_back(std::move(sol.trajectory));
      out.adjoint.push_back(std::move(adj));
    }
  }
  add_regularization(mesh, eps, problem.params, raw);
  out.value = out.misfit + out.regularization;
  out.gradient = to_gradient_field(mesh, raw);
  out.gradient_norm = weighted_norm(domain_weights(mesh), out.gradient.values);
  return out;
}

GradientCheck gradient_check(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem,
                             int directions, double h, std::uint64_t seed) {
  const auto eval = evaluate(mesh, eps, problem, false);
  const auto w = domain_weights(mesh);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  GradientCheck out;
  for (int d = 0; d < directions; ++d) {
    std::vector<double> dir(mesh.num_vertices(), 0.0);
    for (std::size_t i = 0; i < dir.size(); ++i) {
      if (mesh.is_free_vertex(i)) dir[i] = uni(rng);
    }
    PermittivityField plus = eps, minus = eps;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      plus.values[i] += h * dir[i];
      minus.values[i] -= h * dir[i];
    }
    const double fd = (evaluate_value(mesh, plus, problem) - evaluate_value(mesh, minus, problem)) / (2.0 * h);
    const double adj = weighted_dot(w, eval.gradient.values, dir);
    out.adjoint.push_back(adj);
    out.difference.push_back(fd);
    const double scale = std::max(std::abs(fd), std::numeric_limits<double>::min());
    out.rel_error.push_back(std::abs(adj - fd) / scale);
  }
  return out;
}

}  // namespace afem
