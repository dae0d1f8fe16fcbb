#pragma once

#include <cstdint>
#include <string>
#include <functional>
#include <span>
#include <vector>

#include "afem/discretization.hpp"
#include "afem/mesh.hpp"

namespace afem {

/// sin(omega t) on (0, 2 pi / omega), zero elsewhere.
double plane_wave_pulse(double omega, double t);

/// Smooth cut-off: 1 up to T - delta, 0 from T - delta/2 on, quintic
/// smoothstep in between.
double cutoff_zdelta(double t, double t_final, double delta);

enum class BcMode : std::uint8_t {
  neumann,  ///< dE/dn = P on the whole boundary
  hybrid,   ///< pulse on the illuminated face, first-order absorbing elsewhere and afterwards
};

const char* to_string(BcMode mode);
BcMode bc_mode_from_string(const std::string& name);

struct SourceSpec {
  double omega = 40.0;
  double amplitude = 1.0;
  BoundarySide side = BoundarySide::front;
  int component = 1;  ///< 0-based; 1 drives E2

  double active_until() const;
  bool operator==(const SourceSpec&) const = default;
};

enum class TrajectoryKind : std::uint8_t { direct, adjoint };

/// Nodal 3-vector fields at every node of a time grid.
struct FieldTrajectory {
  std::uint64_t mesh_id = 0;
  TimeGrid grid;
  TrajectoryKind kind = TrajectoryKind::direct;
  std::vector<std::vector<double>> levels;
};

/// Field samples at boundary vertices for every time node.
/// values[n][3 * j + c] is component c at vertices[j] and time node n.
struct BoundaryObservation {
  std::uint64_t mesh_id = 0;
  int source_id = 0;
  std::vector<BoundarySide> sides;
  std::vector<Index> vertices;
  std::vector<Vec3> positions;
  TimeGrid grid;
  std::vector<std::vector<double>> values;
};

struct WaveSettings {
  double s = 1.0;
  BcMode bc = BcMode::hybrid;
  double eps_max = 5.0;
  std::vector<BoundarySide> observed{BoundarySide::front};
  /// When false only the boundary record is kept.
  bool keep_trajectory = true;
};

/// tau_max = 0.5 h_min / sqrt(3 eps_max), h_min the smallest tet diameter.
double cfl_max_step(const TetMesh& mesh, double eps_max);
void check_cfl(const TetMesh& mesh, const TimeGrid& grid, double eps_max);

/// Diagonal absorbing-boundary weights B^n for each time node.
class DampingSchedule {
 public:
  DampingSchedule() = default;
  DampingSchedule(const TetMesh& mesh, const SourceSpec& source, BcMode mode);

  bool empty() const { return always_.empty(); }
  /// Per-vertex weight at time t.
  double at(std::size_t vertex, double t) const {
    if (always_.empty()) return 0.0;
    return always_[vertex] + (t >= switch_time_ ? late_[vertex] : 0.0);
  }

 private:
  std::vector<double> always_;
  std::vector<double> late_;
  double switch_time_ = 0.0;
};

/// Fills the load vector (3 per vertex) of time node n.
using LoadFn = std::function<void(std::size_t n, std::span<double> load)>;
using StepObserver = std::function<void(std::size_t n, std::span<const double> field)>;

/// Leapfrog with zero initial data (E^0 = E^1 = 0):
///   M (E^{n+1} - 2E^n + E^{n-1}) / tau^2 + B^n (E^{n+1} - E^{n-1}) / (2 tau) + K E^n = b^n.
/// The observer sees every level, including the zero ones.
FieldTrajectory integrate_forward(const WaveOperator& op, const TimeGrid& grid, const DampingSchedule& damping,
                                  const LoadFn& load, const StepObserver& observer = {}, bool keep = true);

/// Exact transpose of integrate_forward, stepping backward from mu^N = mu^{N+1} = 0:
///   (M/tau^2 + B^{k-1}/(2 tau)) mu^{k-1} + (K - 2M/tau^2) mu^k + (M/tau^2 - B^{k+1}/(2 tau)) mu^{k+1} = r^k.
FieldTrajectory integrate_backward(const WaveOperator& op, const TimeGrid& grid, const DampingSchedule& damping,
                                   const LoadFn& load);

struct DirectSolution {
  FieldTrajectory trajectory;
  BoundaryObservation observation;
};

DirectSolution solve_direct(const TetMesh& mesh, const PermittivityField& eps, const SourceSpec& source,
                            const TimeGrid& grid, const WaveSettings& settings);

/// Observation-face quadrature weights (per vertex of the record).
std::vector<double> observation_weights(const TetMesh& mesh, const BoundaryObservation& record);

/// Trapezoidal time weight of node n.
double trapezoid_weight(const TimeGrid& grid, std::size_t n);

/// Adjoint solve driven by misfit = (E - G) z_delta^2 sampled like the direct
/// observation. The load at node k is -(w_k / tau) a_i misfit_i^k.
FieldTrajectory solve_adjoint(const TetMesh& mesh, const PermittivityField& eps, const BoundaryObservation& misfit,
                              const SourceSpec& source, const TimeGrid& grid, const WaveSettings& settings);

/// 1/2 |(E^{n+1} - E^n)/tau|_M^2 + 1/2 <K E^n, E^{n+1}> for n = 0..N-1.
std::vector<double> discrete_energy(const WaveOperator& op, const FieldTrajectory& traj);

}  // namespace afem
