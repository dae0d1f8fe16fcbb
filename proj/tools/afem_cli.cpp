// Command-line front end: generate, invert, gradcheck, report.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "afem/config.hpp"
#include "afem/error.hpp"
#include "afem/experiment.hpp"
#include "afem/io.hpp"

namespace fs = std::filesystem;
using namespace afem;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string variant;
  bool paper_scale = false;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  if (c.paper_scale) apply_paper_scale(cfg);
  if (c.seed) cfg.noise.seed = *c.seed;
  if (!c.variant.empty()) cfg.adaptive.variant = variant_from_string(c.variant);
  if (!c.out_dir.empty()) cfg.output.dir = c.out_dir;
  validate(cfg);
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "experiment config (INI)")->check(CLI::ExistingFile);
  app->add_option("--out", c.out_dir, "output directory (overrides output.dir)");
  app->add_option("--seed", c.seed, "noise seed");
  app->add_option("--variant", c.variant, "adaptive variant")->check(CLI::IsMember({"first", "second"}));
  app->add_flag("--paper-scale", c.paper_scale, "h0 = 0.05, tau = 0.006");
}

int cmd_generate(const Common& c) {
  const auto cfg = resolve(c);
  const fs::path out = cfg.output.dir;
  fs::create_directories(out);
  const TetMesh mesh = build_inversion_mesh(cfg);
  const auto truth = synthesize_phantom(cfg.phantom, mesh, cfg.params.eps_max);
  const auto clean = generate_data(cfg, mesh);
  const TimeGrid grid = inversion_grid(cfg, mesh);
  std::vector<std::string> files;
  write_file(out / "config.ini", serialize_config(cfg));
  files.push_back("config.ini");
  write_vtk(out / "phantom.vtk", mesh, {{"eps_true", truth.values, 1}}, {});
  files.push_back("phantom.vtk");
  for (std::size_t i = 0; i < clean.records.size(); ++i) {
    const std::string tag = "s" + std::to_string(i + 1);
    const auto noisy = add_noise(clean.records[i], cfg.noise.sigma, cfg.noise.seed + i, cfg.noise.model);
    write_observation_csv(out / ("data_clean_" + tag + ".csv"),
                          resample_observation(clean.records[i], clean.mesh, mesh, grid));
    write_observation_csv(out / ("data_noisy_" + tag + ".csv"), resample_observation(noisy, clean.mesh, mesh, grid));
    files.push_back("data_clean_" + tag + ".csv");
    files.push_back("data_noisy_" + tag + ".csv");
  }
  write_manifest(out / "manifest.txt",
                 {{"name", cfg.name},
                  {"generator", "afem 1.0"},
                  {"config_sha256", sha256_hex(serialize_config(cfg))},
                  {"noise_model", to_string(cfg.noise.model)},
                  {"noise_sigma", format_double(cfg.noise.sigma)},
                  {"noise_seed", std::to_string(cfg.noise.seed)}},
                 out, files);
  std::cout << "mesh: " << mesh.num_tets() << " tets, " << mesh.num_vertices() << " vertices\n"
            << "time: " << grid.n_steps << " steps of " << format_double(grid.dt) << "\n"
            << "wrote " << files.size() << " files to " << out.string() << "\n";
  return 0;
}

int cmd_invert(const Common& c) {
  const auto cfg = resolve(c);
  const auto result = run_experiment(cfg, cfg.output.dir);
  const auto& run = result.run;
  for (std::size_t k = 0; k < run.records.size(); ++k) {
    const auto& r = run.records[k];
    std::printf("level %d: %zu tets, eps~ = %.3f, error = %.2f%%, M = %d (%s), %.1f s\n", r.level, r.elements,
                r.eps_peak, 100.0 * result.rel_errors[k], r.cg_iterations, to_string(r.cg_stop), r.wall_seconds);
  }
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  std::printf("k_rec = %d, stop = %s\n", run.k_rec, to_string(run.stop));
  return 0;
}

int cmd_gradcheck(const Common& c, int directions, double h) {
  auto cfg = resolve(c);
  cfg.data.same_mesh = true;
  const TetMesh mesh = build_inversion_mesh(cfg);
  const auto data = generate_data(cfg, mesh);
  InverseProblem p;
  for (const auto& s : cfg.sources) p.sources.push_back(s.spec);
  p.grid = inversion_grid(cfg, mesh);
  p.wave.s = cfg.params.s;
  p.wave.bc = cfg.params.bc;
  p.wave.eps_max = cfg.params.eps_max;
  p.params.alpha = cfg.params.alpha;
  p.params.delta = cfg.params.delta;
  p.params.s = cfg.params.s;
  p.params.eps0 = project_admissible(std::vector<double>(mesh.num_vertices(), cfg.params.eps0), mesh,
                                     cfg.params.eps_max);
  p.data = data.records;
  const auto check = gradient_check(mesh, p.params.eps0, p, directions, h, cfg.noise.seed);
  bool ok = true;
  for (std::size_t d = 0; d < check.rel_error.size(); ++d) {
    std::printf("direction %zu: adjoint %.12e  fd %.12e  rel %.3e\n", d + 1, check.adjoint[d], check.difference[d],
                check.rel_error[d]);
    ok = ok && check.rel_error[d] <= 1e-3;
  }
  std::printf("%s\n", ok ? "gradient check passed" : "gradient check FAILED");
  return ok ? 0 : 1;
}

int cmd_report(const Common& c) {
  fs::path dir = c.out_dir;
  if (dir.empty()) dir = c.config_path.empty() ? fs::path("out") : fs::path(load_config(c.config_path).output.dir);
  const auto rows = read_csv(dir / "summary.csv");
  if (rows.empty()) throw IoError("empty summary in " + dir.string());
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      std::cout << r[i] << std::string(width[i] - r[i].size() + 2, ' ');
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive finite element reconstruction of permittivity from boundary wave data"};
  app.require_subcommand(1);
  Common common;
  int directions = 5;
  double h = 1e-4;

  auto* gen = app.add_subcommand("generate", "synthesize the phantom and boundary data");
  add_common(gen, common);
  auto* inv = app.add_subcommand("invert", "run the adaptive reconstruction");
  add_common(inv, common);
  auto* grad = app.add_subcommand("gradcheck", "compare the adjoint gradient with finite differences");
  add_common(grad, common);
  grad->add_option("--directions", directions, "random directions")->check(CLI::PositiveNumber);
  grad->add_option("--step", h, "difference step")->check(CLI::PositiveNumber);
  auto* rep = app.add_subcommand("report", "print the summary table of a finished run");
  add_common(rep, common);

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_generate(common);
    if (inv->parsed()) return cmd_invert(common);
    if (grad->parsed()) return cmd_gradcheck(common, directions, h);
    if (rep->parsed()) return cmd_report(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
