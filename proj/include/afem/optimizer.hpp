#pragma once

#include <span>
#include <string>
#include <vector>

#include "afem/objective.hpp"

namespace afem {

struct CgSettings {
  double theta = 0.0;  ///< stop when |R|_Omega <= theta
  int max_iter = 10;
  int stagnation_window = 3;
  double stagnation_rtol = 1e-4;
  int safeguard = 16;  ///< step halvings tried when F increases
  double eps_max = 5.0;

  bool operator==(const CgSettings&) const = default;
};

struct CgCoefficients {
  double beta = 0.0;
  std::vector<double> dir;
  double gamma = 0.0;
  bool converged = false;  ///< direction vanished
  bool restart = false;    ///< previous gradient was zero, beta reset
};

/// One conjugate-gradient update with L2(Omega) products under weights w.
/// At the first iteration pass empty grad_prev and dir_prev: d = -R, beta = 0.
CgCoefficients cg_coefficients(std::span<const double> w, std::span<const double> grad_now,
                               std::span<const double> grad_prev, std::span<const double> dir_prev, double alpha);

enum class CgStop : std::uint8_t { gradient_tol, stagnation, max_iter, no_descent, zero_direction };

const char* to_string(CgStop stop);

struct CgRecord {
  int iter = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  double gamma = 0.0;  ///< accepted step (0 for the starting point)
  double beta = 0.0;
  double eps_norm = 0.0;
  int halvings = 0;
  double wall_seconds = 0.0;
};

/// Final CG state. history[0] describes the starting point, history[n] the
/// n-th accepted update, so history.size() == iter + 1.
struct CgState {
  PermittivityField eps;
  GradientField grad;
  std::vector<double> dir;
  int iter = 0;
  std::vector<CgRecord> history;
  CgStop stop = CgStop::max_iter;
  double min_grad_norm = 0.0;
  /// Evaluation at the final iterate, trajectories included.
  Evaluation last;
};

CgState run_cg(const TetMesh& mesh, const PermittivityField& eps_init, const InverseProblem& problem,
               const CgSettings& settings);

}  // namespace afem
