#include "afem/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <unordered_map>

#include "afem/error.hpp"
#include "afem/io.hpp"

namespace afem {

TetMesh build_inversion_mesh(const ExperimentConfig& config) {
  return build_uniform_mesh(config.geometry.outer, config.geometry.h0, config.geometry.inner);
}

double phantom_value(const PhantomSpec& spec, const Box& inner, const Vec3& x) {
  if (!inner.contains(x)) return 1.0;
  switch (spec.kind) {
    case PhantomKind::background: return 1.0;
    case PhantomKind::gaussians: {
      double v = 1.0;
      for (const auto& g : spec.gaussians) {
        const Vec3 d = x - g.center;
        v += g.amplitude * std::exp(-dot(d, d) / g.width);
      }
      return v;
    }
    case PhantomKind::spheres: {
      double v = 1.0;
      for (const auto& s : spec.spheres) {
        if (norm(x - s.center) <= 0.5 * s.diameter) v = std::max(v, s.contrast);
      }
      return v;
    }
  }
  return 1.0;
}

PermittivityField synthesize_phantom(const PhantomSpec& spec, const TetMesh& mesh, double eps_max) {
  std::vector<double> v(mesh.num_vertices());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = phantom_value(spec, mesh.inner_box(), mesh.vertex(i));
  return project_admissible(v, mesh, eps_max);
}

TimeGrid inversion_grid(const ExperimentConfig& config, const TetMesh& mesh) {
  return level_grid(mesh, config.time.t_final, config.time.dt, config.params.eps_max);
}

namespace {

WaveSettings wave_settings(const ExperimentConfig& config, const SourceConfig& src, bool keep) {
  WaveSettings w;
  w.s = config.params.s;
  w.bc = config.params.bc;
  w.eps_max = config.params.eps_max;
  w.observed = src.observed;
  w.keep_trajectory = keep;
  return w;
}

}  // namespace

GeneratedData generate_data(const ExperimentConfig& config, const TetMesh& inversion_mesh) {
  const TimeGrid grid0 = inversion_grid(config, inversion_mesh);
  GeneratedData out{config.data.same_mesh ? inversion_mesh : refine_all(inversion_mesh), {}};
  TimeGrid grid = grid0;
  if (!config.data.same_mesh) {
    // At least half the inversion step, finer if the refined mesh needs it;
    // an integer ratio keeps every inversion node on a data node.
    const double limit = cfl_max_step(out.mesh, config.params.eps_max);
    std::size_t ratio = 2;
    while (grid0.dt / static_cast<double>(ratio) > limit) ++ratio;
    grid = TimeGrid::uniform(grid0.t_final, ratio * grid0.n_steps);
  }
  const auto truth = synthesize_phantom(config.phantom, out.mesh, config.params.eps_max);
  for (std::size_t i = 0; i < config.sources.size(); ++i) {
    const auto& src = config.sources[i];
    auto sol = solve_direct(out.mesh, truth, src.spec, grid, wave_settings(config, src, false));
    sol.observation.source_id = static_cast<int>(i);
    out.records.push_back(std::move(sol.observation));
  }
  return out;
}

BoundaryObservation add_noise(const BoundaryObservation& obs, double sigma, std::uint64_t seed, NoiseModel model) {
  if (!(sigma >= 0.0)) throw ConfigError("add_noise: sigma must be nonnegative");
  BoundaryObservation out = obs;
  if (sigma == 0.0) return out;
  double amp = 0.0;
  for (const auto& row : obs.values) {
    for (double v : row) amp = std::max(amp, std::abs(v));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (auto& row : out.values) {
    for (double& v : row) {
      const double u = uni(rng);
      v = model == NoiseModel::additive_max ? v + sigma * amp * u : v * (1.0 + sigma * u);
    }
  }
  return out;
}

BoundaryObservation resample_observation(const BoundaryObservation& src, const TetMesh& src_mesh,
                                         const TetMesh& dst_mesh, const TimeGrid& dst_grid) {
  require_same_mesh(src.mesh_id, src_mesh, "resample_observation: source record");
  if (src.values.size() != src.grid.num_nodes()) throw SizeError("resample_observation: incomplete source record");
  if (std::abs(src.grid.t_final - dst_grid.t_final) > 1e-12 * src.grid.t_final) {
    throw MismatchError("resample_observation: different final times");
  }

  BoundaryObservation out;
  out.mesh_id = dst_mesh.id();
  out.source_id = src.source_id;
  out.sides = src.sides;
  out.vertices = boundary_vertices(dst_mesh, src.sides);
  for (Index v : out.vertices) out.positions.push_back(dst_mesh.vertex(v));
  out.grid = dst_grid;

  std::unordered_map<Index, std::size_t> slot;
  for (std::size_t j = 0; j < src.vertices.size(); ++j) slot[src.vertices[j]] = j;

  // Spatial stencils: (source slot, weight) per destination vertex.
  std::vector<std::vector<std::pair<std::size_t, double>>> stencil(out.vertices.size());
  const PointLocator locator(src_mesh);
  for (std::size_t j = 0; j < out.vertices.size(); ++j) {
    const auto hit = locator.locate(out.positions[j]);
    const auto& t = src_mesh.tet(hit.tet);
    double total = 0.0;
    int best = 0;
    for (int a = 1; a < 4; ++a) {
      if (hit.weights[a] > hit.weights[best]) best = a;
    }
    if (hit.weights[best] > 1.0 - 1e-12 && slot.count(t[best])) {
      stencil[j].push_back({slot.at(t[best]), 1.0});
      continue;
    }
    for (int a = 0; a < 4; ++a) {
      const auto it = slot.find(t[a]);
      if (it == slot.end() || std::abs(hit.weights[a]) < 1e-14) continue;
      stencil[j].push_back({it->second, hit.weights[a]});
      total += hit.weights[a];
    }
    if (std::abs(total - 1.0) > 1e-8) {
      throw GeometryError("resample_observation: destination vertex not on an observed source face");
    }
    for (auto& s : stencil[j]) s.second /= total;
  }

  const bool same_time = dst_grid == src.grid;
  out.values.assign(dst_grid.num_nodes(), std::vector<double>(3 * out.vertices.size(), 0.0));
  for (std::size_t n = 0; n < dst_grid.num_nodes(); ++n) {
    std::size_t n0 = n;
    double frac = 0.0;
    if (!same_time) {
      const double u = dst_grid.time(n) / src.grid.dt;
      n0 = std::min(static_cast<std::size_t>(std::floor(u)), src.grid.n_steps);
      frac = u - static_cast<double>(n0);
      if (n0 == src.grid.n_steps || frac < 1e-12) frac = 0.0;
      if (frac > 1.0 - 1e-12) {
        ++n0;
        frac = 0.0;
      }
    }
    const auto& r0 = src.values[n0];
    const auto& r1 = src.values[std::min(n0 + 1, src.grid.n_steps)];
    auto& row = out.values[n];
    for (std::size_t j = 0; j < out.vertices.size(); ++j) {
      for (const auto& [s, w] : stencil[j]) {
        for (int c = 0; c < 3; ++c) {
          const double v0 = r0[3 * s + c];
          const double v = frac == 0.0 ? v0 : v0 + frac * (r1[3 * s + c] - v0);
          row[3 * j + c] += w * v;
        }
      }
    }
  }
  return out;
}

double relative_error(const PermittivityField& eps_true, const PermittivityField& eps_rec, const TetMesh& mesh) {
  require_same_mesh(eps_true.mesh_id, mesh, "relative_error: true field");
  require_same_mesh(eps_rec.mesh_id, mesh, "relative_error: reconstruction");
  const auto w = domain_weights(mesh);
  std::vector<double> d(w.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = eps_true.values[i] - eps_rec.values[i];
  return weighted_norm(w, d) / weighted_norm(w, eps_rec.values);
}

AdaptiveProblem make_adaptive_problem(const ExperimentConfig& config, const GeneratedData& noisy,
                                      const TetMesh& inversion_mesh) {
  AdaptiveProblem p;
  for (const auto& s : config.sources) p.sources.push_back(s.spec);
  p.wave.s = config.params.s;
  p.wave.bc = config.params.bc;
  p.wave.eps_max = config.params.eps_max;
  p.alpha = config.params.alpha;
  p.eps0 = config.params.eps0;
  p.delta = config.params.delta;
  p.t_final = config.time.t_final;
  p.dt_max = inversion_grid(config, inversion_mesh).dt;
  p.cg = config.cg;
  p.cg.eps_max = config.params.eps_max;
  p.adaptive = config.adaptive;
  auto shared = std::make_shared<const GeneratedData>(noisy);
  p.data = [shared](const TetMesh& mesh, const TimeGrid& grid) {
    std::vector<BoundaryObservation> out;
    for (const auto& rec : shared->records) out.push_back(resample_observation(rec, shared->mesh, mesh, grid));
    return out;
  };
  return p;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  validate(config);
  const TetMesh mesh = build_inversion_mesh(config);
  const GeneratedData clean = generate_data(config, mesh);
  GeneratedData noisy = clean;
  for (std::size_t i = 0; i < noisy.records.size(); ++i) {
    noisy.records[i] = add_noise(clean.records[i], config.noise.sigma, config.noise.seed + i, config.noise.model);
  }
  const AdaptiveProblem problem = make_adaptive_problem(config, noisy, mesh);

  ExperimentResult result;
  result.run = run_adaptive(mesh, problem);
  const auto& run = result.run;
  for (std::size_t k = 0; k < run.meshes.size(); ++k) {
    const auto truth = synthesize_phantom(config.phantom, run.meshes[k], config.params.eps_max);
    result.rel_errors.push_back(relative_error(truth, run.eps_per_level[k], run.meshes[k]));
  }
  if (out_dir.empty()) return result;

  std::filesystem::create_directories(out_dir);
  auto& files = result.files;
  write_file(out_dir / "config.ini", serialize_config(config));
  files.push_back("config.ini");

  const TimeGrid grid0 = inversion_grid(config, mesh);
  for (std::size_t i = 0; i < clean.records.size(); ++i) {
    const std::string tag = "s" + std::to_string(i + 1);
    write_observation_csv(out_dir / ("data_clean_" + tag + ".csv"),
                          resample_observation(clean.records[i], clean.mesh, mesh, grid0));
    write_observation_csv(out_dir / ("data_noisy_" + tag + ".csv"),
                          resample_observation(noisy.records[i], noisy.mesh, mesh, grid0));
    files.push_back("data_clean_" + tag + ".csv");
    files.push_back("data_noisy_" + tag + ".csv");
  }

  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < run.meshes.size(); ++k) {
    const auto& m = run.meshes[k];
    const std::string tag = "level" + std::to_string(k);
    if (config.output.vtk) {
      const auto truth = synthesize_phantom(config.phantom, m, config.params.eps_max);
      std::vector<double> marked(m.num_tets(), 0.0), level(m.num_tets());
      for (std::size_t t : run.markings[k].marked) marked[t] = 1.0;
      for (std::size_t t = 0; t < m.num_tets(); ++t) level[t] = m.levels()[t];
      write_vtk(out_dir / (tag + ".vtk"), m, {{"eps", run.eps_per_level[k].values, 1}, {"eps_true", truth.values, 1}},
                {{"indicator", run.indicators[k].values, 1}, {"marked", marked, 1}, {"refinement_level", level, 1}});
      files.push_back(tag + ".vtk");
    }
    write_history_csv(out_dir / ("history_" + tag + ".csv"), run.histories[k]);
    files.push_back("history_" + tag + ".csv");
    rows.push_back({run.records[k], result.rel_errors[k]});
  }
  write_summary_csv(out_dir / "summary.csv", rows, run.k_rec, to_string(run.stop));
  files.push_back("summary.csv");

  std::vector<std::pair<std::string, std::string>> entries{
      {"name", config.name},
      {"generator", "afem 1.0"},
      {"config_sha256", sha256_hex(serialize_config(config))},
      {"noise_model", to_string(config.noise.model)},
      {"noise_sigma", format_double(config.noise.sigma)},
      {"noise_seed", std::to_string(config.noise.seed)},
      {"data_mesh", config.data.same_mesh ? "inversion mesh"
                                          : "inversion mesh refined once, time step divided by an integer >= 2"},
      {"variant", to_string(config.adaptive.variant)},
      {"k_rec", std::to_string(run.k_rec)},
      {"stop_reason", to_string(run.stop)},
  };
  for (const auto& w : run.warnings) entries.push_back({"warning", w});
  write_manifest(out_dir / "manifest.txt", entries, out_dir, files);
  return result;
}

}  // namespace afem
