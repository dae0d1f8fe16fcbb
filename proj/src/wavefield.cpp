#include "afem/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "afem/error.hpp"

namespace afem {

double plane_wave_pulse(double omega, double t) {
  const double period = 2.0 * std::numbers::pi / omega;
  if (t <= 0.0 || t >= period) return 0.0;
  return std::sin(omega * t);
}

double cutoff_zdelta(double t, double t_final, double delta) {
  if (!(delta > 0.0) || delta >= t_final) {
    throw ConfigError("cutoff_zdelta: need 0 < delta < T");
  }
  const double start = t_final - delta;
  const double stop = t_final - 0.5 * delta;
  if (t <= start) return 1.0;
  if (t >= stop) return 0.0;
  const double u = (t - start) / (stop - start);
  const double smooth = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  return 1.0 - smooth;
}

const char* to_string(BcMode mode) { return mode == BcMode::neumann ? "neumann" : "hybrid"; }

BcMode bc_mode_from_string(const std::string& name) {
  if (name == "neumann") return BcMode::neumann;
  if (name == "hybrid") return BcMode::hybrid;
  throw ConfigError("unknown boundary condition mode '" + name + "'");
}

double SourceSpec::active_until() const { return 2.0 * std::numbers::pi / omega; }

double cfl_max_step(const TetMesh& mesh, double eps_max) {
  double h_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.num_tets(); ++k) h_min = std::min(h_min, mesh.diameter(k));
  return 0.5 * h_min / std::sqrt(3.0 * eps_max);
}

void check_cfl(const TetMesh& mesh, const TimeGrid& grid, double eps_max) {
  const double limit = cfl_max_step(mesh, eps_max);
  if (grid.dt > limit * (1.0 + 1e-9)) {
    throw StabilityError("time step " + std::to_string(grid.dt) + " exceeds the CFL limit " + std::to_string(limit));
  }
}

DampingSchedule::DampingSchedule(const TetMesh& mesh, const SourceSpec& source, BcMode mode) {
  if (mode == BcMode::neumann) return;
  always_.assign(mesh.num_vertices(), 0.0);
  late_.assign(mesh.num_vertices(), 0.0);
  switch_time_ = source.active_until();
  for (Index f : mesh.boundary_faces()) {
    const auto& face = mesh.faces()[f];
    auto& target = mesh.side(f) == source.side ? late_ : always_;
    for (Index v : face.v) target[v] += face.area / 3.0;
  }
}

namespace {

void check_finite(std::span<const double> v, std::size_t step) {
  double s = 0.0;
  for (double x : v) s += x;
  if (!std::isfinite(s)) throw DivergenceError("non-finite field during time stepping", step);
}

}  // namespace

FieldTrajectory integrate_forward(const WaveOperator& op, const TimeGrid& grid, const DampingSchedule& damping,
                                  const LoadFn& load, const StepObserver& observer, bool keep) {
  const TetMesh& mesh = op.mesh();
  const std::size_t nv = mesh.num_vertices();
  const std::size_t n = 3 * nv;
  const double tau = grid.dt;
  const auto& mass = op.mass();

  FieldTrajectory traj{mesh.id(), grid, TrajectoryKind::direct, {}};
  std::vector<double> prev(n, 0.0), cur(n, 0.0), next(n, 0.0), kv(n), b(n);
  if (keep) {
    traj.levels.reserve(grid.num_nodes());
    traj.levels.push_back(prev);
    traj.levels.push_back(cur);
  }
  if (observer) {
    observer(0, prev);
    observer(1, cur);
  }
  for (std::size_t step = 1; step < grid.n_steps; ++step) {
    const double t = grid.time(step);
    std::fill(b.begin(), b.end(), 0.0);
    load(step, b);
    op.apply(cur, kv);
    for (std::size_t i = 0; i < nv; ++i) {
      const double m = mass[i] / (tau * tau);
      const double damp = damping.at(i, t) / (2.0 * tau);
      const double inv = 1.0 / (m + damp);
      for (int c = 0; c < 3; ++c) {
        const std::size_t j = 3 * i + c;
        next[j] = inv * (b[j] - kv[j] + m * (2.0 * cur[j] - prev[j]) + damp * prev[j]);
      }
    }
    check_finite(next, step + 1);
    std::swap(prev, cur);
    std::swap(cur, next);
    if (keep) traj.levels.push_back(cur);
    if (observer) observer(step + 1, cur);
  }
  return traj;
}

FieldTrajectory integrate_backward(const WaveOperator& op, const TimeGrid& grid, const DampingSchedule& damping,
                                   const LoadFn& load) {
  const TetMesh& mesh = op.mesh();
  const std::size_t nv = mesh.num_vertices();
  const std::size_t n = 3 * nv;
  const std::size_t nsteps = grid.n_steps;
  const double tau = grid.dt;
  const auto& mass = op.mass();

  FieldTrajectory traj{mesh.id(), grid, TrajectoryKind::adjoint, {}};
  traj.levels.assign(grid.num_nodes(), std::vector<double>());
  std::vector<double> after(n, 0.0), cur(n, 0.0), before(n, 0.0), kv(n), r(n);  // mu^{k+1}, mu^k, mu^{k-1}
  traj.levels[nsteps] = cur;
  // k runs down to 1; the k = 1 sweep extends the adjoint to the first node.
  for (std::size_t k = nsteps; k >= 1; --k) {
    std::fill(r.begin(), r.end(), 0.0);
    load(k, r);
    op.apply(cur, kv);
    const double t_before = grid.time(k - 1);
    const double t_after = grid.time(k) + tau;
    for (std::size_t i = 0; i < nv; ++i) {
      const double m = mass[i] / (tau * tau);
      const double d_before = damping.at(i, t_before) / (2.0 * tau);
      const double d_after = damping.at(i, t_after) / (2.0 * tau);
      const double inv = 1.0 / (m + d_before);
      for (int c = 0; c < 3; ++c) {
        const std::size_t j = 3 * i + c;
        before[j] = inv * (r[j] - kv[j] + 2.0 * m * cur[j] - (m - d_after) * after[j]);
      }
    }
    check_finite(before, k - 1);
    traj.levels[k - 1] = before;
    std::swap(after, cur);
    std::swap(cur, before);
  }
  return traj;
}

// ---------------------------------------------------------------------------

DirectSolution solve_direct(const TetMesh& mesh, const PermittivityField& eps, const SourceSpec& source,
                            const TimeGrid& grid, const WaveSettings& settings) {
  require_same_mesh(eps.mesh_id, mesh, "solve_direct: permittivity");
  if (!(source.omega > 0.0)) throw ConfigError("solve_direct: omega must be positive");
  if (source.component < 0 || source.component > 2) throw ConfigError("solve_direct: component must be 0, 1 or 2");
  check_cfl(mesh, grid, settings.eps_max);

  const WaveOperator op(mesh, eps, settings.s);
  const DampingSchedule damping(mesh, source, settings.bc);
  const auto illum = boundary_weights(mesh, source.side);

  DirectSolution out;
  auto& obs = out.observation;
  obs.mesh_id = mesh.id();
  obs.sides = settings.observed;
  obs.vertices = boundary_vertices(mesh, settings.observed);
  for (Index v : obs.vertices) obs.positions.push_back(mesh.vertex(v));
  obs.grid = grid;
  obs.values.assign(grid.num_nodes(), std::vector<double>(3 * obs.vertices.size(), 0.0));

  auto load = [&](std::size_t step, std::span<double> b) {
    const double p = source.amplitude * plane_wave_pulse(source.omega, grid.time(step));
    if (p == 0.0) return;
    for (std::size_t i = 0; i < illum.size(); ++i) b[3 * i + source.component] = p * illum[i];
  };
  auto observer = [&](std::size_t step, std::span<const double> field) {
    auto& row = obs.values[step];
    for (std::size_t j = 0; j < obs.vertices.size(); ++j) {
      const auto v = static_cast<std::size_t>(obs.vertices[j]);
      for (int c = 0; c < 3; ++c) row[3 * j + c] = field[3 * v + c];
    }
  };
  out.trajectory = integrate_forward(op, grid, damping, load, observer, settings.keep_trajectory);
  return out;
}

std::vector<double> observation_weights(const TetMesh& mesh, const BoundaryObservation& record) {
  std::vector<double> total(mesh.num_vertices(), 0.0);
  for (BoundarySide side : record.sides) {
    const auto w = boundary_weights(mesh, side);
    for (std::size_t i = 0; i < w.size(); ++i) total[i] += w[i];
  }
  std::vector<double> out(record.vertices.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = total[record.vertices[j]];
  return out;
}

double trapezoid_weight(const TimeGrid& grid, std::size_t n) {
  return (n == 0 || n == grid.n_steps) ? 0.5 * grid.dt : grid.dt;
}

FieldTrajectory solve_adjoint(const TetMesh& mesh, const PermittivityField& eps, const BoundaryObservation& misfit,
                              const SourceSpec& source, const TimeGrid& grid, const WaveSettings& settings) {
  require_same_mesh(eps.mesh_id, mesh, "solve_adjoint: permittivity");
  require_same_mesh(misfit.mesh_id, mesh, "solve_adjoint: misfit record");
  if (!(misfit.grid == grid) || misfit.values.size() != grid.num_nodes()) {
    throw MismatchError("solve_adjoint: misfit sampled on a different time grid");
  }
  check_cfl(mesh, grid, settings.eps_max);

  const WaveOperator op(mesh, eps, settings.s);
  const DampingSchedule damping(mesh, source, settings.bc);
  const auto weights = observation_weights(mesh, misfit);

  auto load = [&](std::size_t k, std::span<double> r) {
    const double scale = -trapezoid_weight(grid, k) / grid.dt;
    const auto& row = misfit.values[k];
    for (std::size_t j = 0; j < misfit.vertices.size(); ++j) {
      const auto v = static_cast<std::size_t>(misfit.vertices[j]);
      for (int c = 0; c < 3; ++c) r[3 * v + c] += scale * weights[j] * row[3 * j + c];
    }
  };
  return integrate_backward(op, grid, damping, load);
}

std::vector<double> discrete_energy(const WaveOperator& op, const FieldTrajectory& traj) {
  if (traj.levels.size() < 2) throw SizeError("discrete_energy: need at least two levels");
  const auto& mass = op.mass();
  const double tau = traj.grid.dt;
  std::vector<double> energy;
  std::vector<double> kv(traj.levels[0].size());
  for (std::size_t n = 0; n + 1 < traj.levels.size(); ++n) {
    const auto& a = traj.levels[n];
    const auto& b = traj.levels[n + 1];
    op.apply(a, kv);
    double kinetic = 0.0, potential = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const std::size_t j = 3 * i + c;
        const double v = (b[j] - a[j]) / tau;
        kinetic += mass[i] * v * v;
      }
    }
    for (std::size_t j = 0; j < kv.size(); ++j) potential += kv[j] * b[j];
    energy.push_back(0.5 * kinetic + 0.5 * potential);
  }
  return energy;
}

}  // namespace afem
