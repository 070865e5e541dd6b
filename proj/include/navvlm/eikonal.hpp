#pragma once

#include <vector>

#include "navvlm/grid.hpp"

namespace navvlm {

/// Travel-time field at unit speed. T is +infinity where unreached.
struct DistanceField {
  GridShape shape;
  std::vector<double> T;
  CellSet source;

  [[nodiscard]] double at(const Cell& c) const { return shape.contains(c) ? T[shape.index(c)] : kInfinity; }
  [[nodiscard]] double h() const { return shape.resolution; }
};

/// First-order fast marching solution of |grad T| = 1 over the traversable
/// cells of `mask`, with T = 0 on `source`. `h` is the cell size in meters
/// and overrides mask.shape.resolution.
///
/// Each trial value is the minimum of two upwind stencils:
///   - axis stencil: (T - Tx)^2 + (T - Ty)^2 = h^2 when |Tx - Ty| < h, else
///     min(Tx, Ty) + h. The two-sided form is only used when the cell between
///     the x- and y-neighbor is traversable, so fronts do not leak around
///     obstacle corners.
///   - diagonal stencil: the same update on the 45-degree rotated lattice
///     with spacing h*sqrt(2); a diagonal neighbor is usable only when both
///     cells it shares with the target are traversable.
/// Accepted cells are taken from a min-ordered narrow band.
///
/// Throws ContractError if the source is empty or a source cell is not
/// traversable.
DistanceField fmm_solve(const TraversabilityMask& mask, const CellSet& source, double h);
inline DistanceField fmm_solve(const TraversabilityMask& mask, const CellSet& source) {
  return fmm_solve(mask, source, mask.shape.resolution);
}

/// True when moving from `from` to its 8-neighbor `to` does not squeeze past
/// a blocked corner: both cells and, for diagonal moves, both shared
/// orthogonal cells are traversable.
bool can_step(const TraversabilityMask& mask, const Cell& from, const Cell& to);

}  // namespace navvlm
