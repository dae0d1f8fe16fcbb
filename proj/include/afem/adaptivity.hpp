#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "afem/estimator.hpp"
#include "afem/optimizer.hpp"

namespace afem {

/// first: mark by the residual indicator; second: by the coefficient magnitude.
enum class Variant : std::uint8_t { first, second };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct AdaptiveSettings {
  Variant variant = Variant::first;
  double beta = 0.7;        ///< marking fraction for the residual indicator
  double beta_tilde = 0.7;  ///< marking fraction for the coefficient indicator
  double theta1 = 0.0;      ///< stop when |eps_k - I eps_{k-1}|_Omega < theta1
  double theta2 = 0.0;      ///< stop when some CG iterate has |R|_Omega < theta2
  int max_levels = 5;       ///< refinements allowed
  bool shifted_coefficient = false;

  bool operator==(const AdaptiveSettings&) const = default;
};

enum class AdaptiveStop : std::uint8_t { gradient_tol, eps_change_tol, max_levels, nothing_to_refine };

const char* to_string(AdaptiveStop stop);

struct LevelRecord {
  int level = 0;
  std::size_t elements = 0;
  std::size_t vertices = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  double eps_change = 0.0;  ///< |eps_k - I eps_{k-1}|_Omega (eps_{-1} := eps0)
  double final_grad_norm = 0.0;
  double min_grad_norm = 0.0;
  int cg_iterations = 0;    ///< M_k
  CgStop cg_stop = CgStop::max_iter;
  double eps_peak = 0.0;    ///< max eps on the level
  double indicator_max = 0.0;
  std::size_t marked = 0;
  double wall_seconds = 0.0;
};

struct AdaptiveRun {
  std::vector<TetMesh> meshes;
  std::vector<PermittivityField> eps_per_level;
  std::vector<ElementIndicator> indicators;  ///< one per level that evaluated one
  std::vector<Marking> markings;
  std::vector<LevelRecord> records;
  std::vector<std::vector<CgRecord>> histories;
  int k_rec = 0;
  AdaptiveStop stop = AdaptiveStop::max_levels;
  std::vector<std::string> warnings;

  const PermittivityField& eps_rec() const { return eps_per_level.back(); }
  const TetMesh& mesh_rec() const { return meshes.back(); }
};

/// Inversion data (one record per source) sampled on the mesh and grid of a level.
using DataProvider = std::function<std::vector<BoundaryObservation>(const TetMesh&, const TimeGrid&)>;

struct AdaptiveProblem {
  std::vector<SourceSpec> sources;
  WaveSettings wave;
  double alpha = 0.01;
  double eps0 = 1.0;  ///< constant background and starting guess
  double delta = 0.3;
  double t_final = 3.0;
  double dt_max = 0.0;  ///< upper bound on tau; 0 means CFL only
  CgSettings cg;
  AdaptiveSettings adaptive;
  DataProvider data;
};

/// Time grid of a level: the largest step allowed by both dt_max and the CFL rule.
TimeGrid level_grid(const TetMesh& mesh, double t_final, double dt_max, double eps_max);

AdaptiveRun run_adaptive(const TetMesh& initial, const AdaptiveProblem& problem);

}  // namespace afem
