#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "afem/objective.hpp"

namespace afem {

enum class IndicatorKind : std::uint8_t { eta, residual, coefficient };

const char* to_string(IndicatorKind kind);

/// Nonnegative per-tet values.
struct ElementIndicator {
  std::uint64_t mesh_id = 0;
  IndicatorKind kind = IndicatorKind::eta;
  std::vector<double> values;
  double max = 0.0;
  double total = 0.0;
};

/// Computable error indicator for the state/adjoint pair. With h = diam(K),
/// per tet K and time interval I_k (all jumps taken at the interval midpoint):
///
///   tau |K| [ (TL/tau + s|div l|)(h SE + tau TE) + (TE/tau)(h SL + tau TL)
///             + s|div l|(SE + tau TDE) + s(|div E| + |E|)(SL + tau TDL) ]
///
/// SE, SL: max normal jump of the gradient over the faces of K.
/// TE, TL: time jump of the time derivative, vertex average of the max over the
/// two interval end nodes. TDE, TDL: same for the element divergence.
/// Multiple (direct, adjoint) pairs are summed.
ElementIndicator eta_indicator(const TetMesh& mesh, std::span<const FieldTrajectory> direct,
                               std::span<const FieldTrajectory> adjoint, double s);

/// |K| |R_K| with
///   R_K = alpha (eps_K - eps0_K) - sum_k tau (dE_K/dt . dl_K/dt)
///         + s / (2 h_K) sum_k tau J_K^k,
/// element means for eps and the fields, and J_K^k the max over interior faces
/// of K and their vertices v of |(div l_K - div l_K') (n . E_v)| at the
/// interval midpoint.
ElementIndicator residual_indicator(const TetMesh& mesh, std::span<const FieldTrajectory> direct,
                                    std::span<const FieldTrajectory> adjoint, const PermittivityField& eps,
                                    const TikhonovParams& params);

/// Max of |eps| (or |eps - 1| when shifted) over the tet's vertices; tets whose
/// centroid lies outside the inner box get 0.
ElementIndicator coefficient_indicator(const PermittivityField& eps, const TetMesh& mesh, bool shifted = false);

struct Marking {
  std::vector<std::size_t> marked;
  bool nothing_to_refine = false;
};

/// {K : value_K >= beta max}, beta in (0, 1).
Marking mark_elements(const ElementIndicator& indicator, double beta);

}  // namespace afem
