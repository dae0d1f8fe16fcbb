#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "afem/adaptivity.hpp"
#include "afem/config.hpp"

namespace afem {

TetMesh build_inversion_mesh(const ExperimentConfig& config);

/// Analytic phantom value at a point (1 outside the inner box).
double phantom_value(const PhantomSpec& spec, const Box& inner, const Vec3& x);

/// Nodal samples of the phantom, projected to the admissible set.
PermittivityField synthesize_phantom(const PhantomSpec& spec, const TetMesh& mesh, double eps_max);

/// Level-0 inversion time grid: config dt if set, else the CFL step.
TimeGrid inversion_grid(const ExperimentConfig& config, const TetMesh& mesh);

struct GeneratedData {
  TetMesh mesh;  ///< mesh the data were computed on
  std::vector<BoundaryObservation> records;  ///< one per source
};

/// Clean data from the true phantom. Unless data.same_mesh is set, the solve
/// runs on the inversion mesh refined once globally with the time step divided
/// by the smallest integer >= 2 that meets the CFL rule there.
GeneratedData generate_data(const ExperimentConfig& config, const TetMesh& inversion_mesh);

/// Seeded uniform noise; see NoiseModel.
BoundaryObservation add_noise(const BoundaryObservation& obs, double sigma, std::uint64_t seed,
                              NoiseModel model = NoiseModel::additive_max);

/// P1-in-space, linear-in-time transfer of a record to the observation
/// vertices of another mesh and another time grid.
BoundaryObservation resample_observation(const BoundaryObservation& src, const TetMesh& src_mesh,
                                         const TetMesh& dst_mesh, const TimeGrid& dst_grid);

/// |eps_true - eps_rec|_Omega / |eps_rec|_Omega.
double relative_error(const PermittivityField& eps_true, const PermittivityField& eps_rec, const TetMesh& mesh);

AdaptiveProblem make_adaptive_problem(const ExperimentConfig& config, const GeneratedData& noisy,
                                      const TetMesh& inversion_mesh);

struct ExperimentResult {
  AdaptiveRun run;
  std::vector<double> rel_errors;  ///< per level
  std::vector<std::string> files;  ///< written files, relative to the output dir
};

/// Full pipeline: phantom, data, noise, adaptive inversion. Writes artifacts
/// to out_dir when it is not empty.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace afem
