#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afem/discretization.hpp"
#include "afem/mesh.hpp"
#include "afem/wavefield.hpp"

namespace afem {

struct TikhonovParams {
  double alpha = 0.01;
  PermittivityField eps0;
  double delta = 0.3;  ///< cut-off width
  double s = 1.0;
};

/// Nodal gradient R_eps. Zero on frozen vertices, scaled so that
/// <R, d>_Omega is the directional derivative of the discrete functional.
struct GradientField {
  std::uint64_t mesh_id = 0;
  std::vector<double> values;
};

/// (E - G) z_delta^2 sample by sample. Both records must share vertices and grid.
BoundaryObservation weighted_residual(const BoundaryObservation& trace, const BoundaryObservation& data, double delta);

/// 1/2 sum_n w_n z_n^2 sum_i a_i |E_i^n - G_i^n|^2 (lumped faces, trapezoid in time).
double misfit_value(const TetMesh& mesh, const BoundaryObservation& trace, const BoundaryObservation& data,
                    double delta);

/// alpha/2 |eps - eps0|^2_Omega.
double regularization_value(const TetMesh& mesh, const PermittivityField& eps, const TikhonovParams& params);

double tikhonov_value(const TetMesh& mesh, const PermittivityField& eps, const BoundaryObservation& trace,
                      const BoundaryObservation& data, const TikhonovParams& params);

/// dF/deps_j of the misfit part, one source: the mass term
/// -sum_intervals tau (d_t lambda . d_t E) tested against hats with the eps-weighted
/// element mass, plus s sum_n tau (|K|/4) div E div lambda for K around j.
/// Raw partial derivatives (not divided by the domain weights).
std::vector<double> misfit_sensitivity(const TetMesh& mesh, const FieldTrajectory& direct,
                                       const FieldTrajectory& adjoint, double s);

/// Converts raw partial derivatives into the nodal field R_eps.
GradientField to_gradient_field(const TetMesh& mesh, std::span<const double> raw);

/// Single-source gradient: alpha (eps - eps0) plus the misfit sensitivity.
GradientField gradient_field(const TetMesh& mesh, const FieldTrajectory& direct, const FieldTrajectory& adjoint,
                             const PermittivityField& eps, const TikhonovParams& params);

/// Clamp to [1, eps_max]; frozen vertices are set to 1.
PermittivityField project_admissible(std::span<const double> values, const TetMesh& mesh, double eps_max);

/// Everything needed to evaluate the functional on one mesh.
struct InverseProblem {
  std::vector<SourceSpec> sources;
  std::vector<BoundaryObservation> data;  ///< one per source, sampled on the mesh
  TimeGrid grid;
  WaveSettings wave;
  TikhonovParams params;
};

struct Evaluation {
  double value = 0.0;
  double misfit = 0.0;
  double regularization = 0.0;
  GradientField gradient;
  double gradient_norm = 0.0;  ///< |R|_Omega
  std::vector<FieldTrajectory> direct;
  std::vector<FieldTrajectory> adjoint;
};

/// Functional value only; forward solves without stored trajectories.
double evaluate_value(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem);

/// Value, gradient summed over sources (regularization counted once) and the
/// trajectories of every source.
Evaluation evaluate(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem,
                    bool keep_trajectories = true);

struct GradientCheck {
  std::vector<double> adjoint;      ///< <R, d>_Omega
  std::vector<double> difference;   ///< central difference quotients
  std::vector<double> rel_error;
};

/// Compares the adjoint directional derivative with central differences in
/// random directions supported on free vertices.
GradientCheck gradient_check(const TetMesh& mesh, const PermittivityField& eps, const InverseProblem& problem,
                             int directions, double h, std::uint64_t seed);

}  // namespace afem
