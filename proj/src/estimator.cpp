#include "afem/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "afem/error.hpp"

namespace afem {

const char* to_string(IndicatorKind kind) {
  switch (kind) {
    case IndicatorKind::eta: return "eta";
    case IndicatorKind::residual: return "residual";
    case IndicatorKind::coefficient: return "coefficient";
  }
  return "unknown";
}

namespace {

void check_pairs(const TetMesh& mesh, std::span<const FieldTrajectory> direct,
                 std::span<const FieldTrajectory> adjoint) {
  if (direct.size() != adjoint.size()) throw MismatchError("indicator: direct/adjoint count differs");
  for (std::size_t p = 0; p < direct.size(); ++p) {
    require_same_mesh(direct[p].mesh_id, mesh, "indicator: direct trajectory");
    require_same_mesh(adjoint[p].mesh_id, mesh, "indicator: adjoint trajectory");
    if (!(direct[p].grid == adjoint[p].grid)) throw MismatchError("indicator: trajectories on different grids");
    const std::size_t nodes = direct[p].grid.num_nodes();
    if (direct[p].levels.size() != nodes || adjoint[p].levels.size() != nodes) {
      throw MismatchError("indicator: trajectories must store every time level");
    }
  }
}

std::vector<double> midpoint(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

/// Per-tet divergence at every node, shaped [node][tet].
std::vector<std::vector<double>> divergence_series(const TetMesh& mesh, const FieldTrajectory& traj) {
  std::vector<std::vector<double>> d(traj.levels.size(), std::vector<double>(mesh.num_tets()));
  for (std::size_t n = 0; n < traj.levels.size(); ++n) {
    for (std::size_t k = 0; k < mesh.num_tets(); ++k) d[n][k] = element_divergence(mesh, k, traj.levels[n]);
  }
  return d;
}

double vertex_average(const TetMesh& mesh, std::size_t k, const std::vector<double>& nodal) {
  const auto& t = mesh.tet(k);
  return 0.25 * (nodal[t[0]] + nodal[t[1]] + nodal[t[2]] + nodal[t[3]]);
}

void finish(ElementIndicator& ind) {
  ind.max = 0.0;
  ind.total = 0.0;
  for (double v : ind.values) {
    ind.max = std::max(ind.max, v);
    ind.total += v;
  }
}

}  // namespace

ElementIndicator eta_indicator(const TetMesh& mesh, std::span<const FieldTrajectory> direct,
                               std::span<const FieldTrajectory> adjoint, double s) {
  check_pairs(mesh, direct, adjoint);
  const std::size_t nt = mesh.num_tets();
  ElementIndicator out{mesh.id(), IndicatorKind::eta, std::vector<double>(nt, 0.0), 0.0, 0.0};

  for (std::size_t p = 0; p < direct.size(); ++p) {
    const auto& E = direct[p];
    const auto& L = adjoint[p];
    const double tau = E.grid.dt;
    const auto tj_e = time_jump(E.levels, tau, 3);
    const auto tj_l = time_jump(L.levels, tau, 3);
    const auto div_e = divergence_series(mesh, E);
    const auto div_l = divergence_series(mesh, L);
    const auto tdj_e = time_jump(div_e, tau, 1);
    const auto tdj_l = time_jump(div_l, tau, 1);

    std::vector<Tensor3> ge(nt), gl(nt);
    for (std::size_t k = 0; k + 1 < E.levels.size(); ++k) {
      const auto em = midpoint(E.levels[k], E.levels[k + 1]);
      const auto lm = midpoint(L.levels[k], L.levels[k + 1]);
      for (std::size_t K = 0; K < nt; ++K) {
        ge[K] = element_gradient(mesh, K, em);
        gl[K] = element_gradient(mesh, K, lm);
      }
      const auto se = face_jump_normal(mesh, std::span<const Tensor3>(ge));
      const auto sl = face_jump_normal(mesh, std::span<const Tensor3>(gl));
      for (std::size_t K = 0; K < nt; ++K) {
        const double h = mesh.diameter(K);
        const double te = vertex_average(mesh, K, tj_e.interval[k]);
        const double tl = vertex_average(mesh, K, tj_l.interval[k]);
        const double dl = std::abs(0.5 * (div_l[k][K] + div_l[k + 1][K]));
        const double de = std::abs(0.5 * (div_e[k][K] + div_e[k + 1][K]));
        const double emag = norm(element_mean(mesh, K, em));
        const double tde = tdj_e.interval[k][K];
        const double tdl = tdj_l.interval[k][K];
        const double bracket = (tl / tau + s * dl) * (h * se[K] + tau * te) + (te / tau) * (h * sl[K] + tau * tl) +
                               s * dl * (se[K] + tau * tde) + s * (de + emag) * (sl[K] + tau * tdl);
        out.values[K] += tau * mesh.volume(K) * bracket;
      }
    }
  }
  finish(out);
  return out;
}

ElementIndicator residual_indicator(const TetMesh& mesh, std::span<const FieldTrajectory> direct,
                                    std::span<const FieldTrajectory> adjoint, const PermittivityField& eps,
                                    const TikhonovParams& params) {
  check_pairs(mesh, direct, adjoint);
  require_same_mesh(eps.mesh_id, mesh, "residual_indicator: eps");
  require_same_mesh(params.eps0.mesh_id, mesh, "residual_indicator: eps0");
  const std::size_t nt = mesh.num_tets();

  std::vector<double> r(nt, 0.0);
  for (std::size_t K = 0; K < nt; ++K) {
    double d = 0.0;
    for (Index v : mesh.tet(K)) d += 0.25 * (eps.values[v] - params.eps0.values[v]);
    r[K] = params.alpha * d;
  }

  std::vector<double> jump_sum(nt, 0.0);
  for (std::size_t p = 0; p < direct.size(); ++p) {
    const auto& E = direct[p];
    const auto& L = adjoint[p];
    const double tau = E.grid.dt;
    std::vector<double> dl(nt), jk(nt);
    for (std::size_t k = 0; k + 1 < E.levels.size(); ++k) {
      const auto& e0 = E.levels[k];
      const auto& e1 = E.levels[k + 1];
      const auto& l0 = L.levels[k];
      const auto& l1 = L.levels[k + 1];
      for (std::size_t K = 0; K < nt; ++K) {
        const Vec3 de = element_mean(mesh, K, e1) - element_mean(mesh, K, e0);
        const Vec3 dlam = element_mean(mesh, K, l1) - element_mean(mesh, K, l0);
        r[K] -= dot(de, dlam) / tau;
      }
      const auto em = midpoint(e0, e1);
      const auto lm = midpoint(l0, l1);
      for (std::size_t K = 0; K < nt; ++K) dl[K] = element_divergence(mesh, K, lm);
      std::fill(jk.begin(), jk.end(), 0.0);
      for (const auto& f : mesh.faces()) {
        if (f.is_boundary()) continue;
        const double ddiv = dl[f.owner] - dl[f.neighbor];
        double j = 0.0;
        for (Index v : f.v) {
          const double* ev = &em[3 * static_cast<std::size_t>(v)];
          const double ne = f.normal[0] * ev[0] + f.normal[1] * ev[1] + f.normal[2] * ev[2];
          j = std::max(j, std::abs(ddiv * ne));
        }
        jk[f.owner] = std::max(jk[f.owner], j);
        jk[f.neighbor] = std::max(jk[f.neighbor], j);
      }
      for (std::size_t K = 0; K < nt; ++K) jump_sum[K] += tau * jk[K];
    }
  }

  ElementIndicator out{mesh.id(), IndicatorKind::residual, std::vector<double>(nt, 0.0), 0.0, 0.0};
  for (std::size_t K = 0; K < nt; ++K) {
    const double val = r[K] + params.s / (2.0 * mesh.diameter(K)) * jump_sum[K];
    out.values[K] = mesh.volume(K) * std::abs(val);
  }
  finish(out);
  return out;
}

ElementIndicator coefficient_indicator(const PermittivityField& eps, const TetMesh& mesh, bool shifted) {
  require_same_mesh(eps.mesh_id, mesh, "coefficient_indicator: eps");
  ElementIndicator out{mesh.id(), IndicatorKind::coefficient, std::vector<double>(mesh.num_tets(), 0.0), 0.0, 0.0};
  for (std::size_t K = 0; K < mesh.num_tets(); ++K) {
    if (!mesh.in_inner_domain(K)) continue;
    double m = 0.0;
    for (Index v : mesh.tet(K)) m = std::max(m, std::abs(eps.values[v] - (shifted ? 1.0 : 0.0)));
    out.values[K] = m;
  }
  finish(out);
  return out;
}

Marking mark_elements(const ElementIndicator& indicator, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("mark_elements: beta must lie in (0, 1)");
  if (indicator.values.empty()) throw SizeError("mark_elements: empty indicator");
  double mx = 0.0;
  for (double v : indicator.values) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("mark_elements: indicator values must be finite and >= 0");
    mx = std::max(mx, v);
  }
  Marking out;
  if (mx <= 0.0) {
    out.nothing_to_refine = true;
    return out;
  }
  const double threshold = beta * mx;
  for (std::size_t k = 0; k < indicator.values.size(); ++k) {
    if (indicator.values[k] >= threshold) out.marked.push_back(k);
  }
  return out;
}

}  // namespace afem
