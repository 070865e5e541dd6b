#include "navvlm/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <utility>

namespace navvlm {

bool can_step(const TraversabilityMask& mask, const Cell& from, const Cell& to) {
  if (!mask.ok(from) || !mask.ok(to)) return false;
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  if (dx != 0 && dy != 0) return mask.ok({from.x + dx, from.y}) && mask.ok({from.x, from.y + dy});
  return true;
}

namespace {

// Upwind update for two orthogonal neighbor values at lattice spacing s.
double solve_pair(double a, double b, double s) {
  if (a > b) std::swap(a, b);
  if (!std::isfinite(a)) return kInfinity;
  if (b - a < s) return 0.5 * (a + b + std::sqrt(2.0 * s * s - (a - b) * (a - b)));
  return a + s;
}

enum class State : std::uint8_t { Far, Trial, Known };

}  // namespace

DistanceField fmm_solve(const TraversabilityMask& mask, const CellSet& source, double h) {
  if (source.empty()) throw ContractError("fmm_solve needs a nonempty source set");
  if (!(h > 0.0)) throw ContractError("fmm_solve needs a positive cell size");
  const GridShape& shape = mask.shape;
  for (const Cell& c : source) {
    if (!mask.ok(c)) throw ContractError("fmm source cell " + to_string(c) + " is not traversable");
  }

  DistanceField field;
  field.shape = shape;
  field.shape.resolution = h;
  field.source = source;
  field.T.assign(shape.size(), kInfinity);
  std::vector<State> state(shape.size(), State::Far);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> band;
  for (const Cell& c : source) {
    const std::size_t i = shape.index(c);
    field.T[i] = 0.0;
    state[i] = State::Trial;
    band.emplace(0.0, i);
  }

  const double diag = h * std::numbers::sqrt2;
  auto known = [&](const Cell& c) {
    return mask.ok(c) && state[shape.index(c)] == State::Known ? field.T[shape.index(c)] : kInfinity;
  };
  auto known_diag = [&](const Cell& c, int dx, int dy) {
    const Cell n{c.x + dx, c.y + dy};
    return can_step(mask, c, n) ? known(n) : kInfinity;
  };

  auto update = [&](const Cell& c) {
    double best = kInfinity;
    for (int sx : {-1, 1}) {
      for (int sy : {-1, 1}) {
        const double tx = known({c.x + sx, c.y});
        const double ty = known({c.x, c.y + sy});
        if (mask.ok({c.x + sx, c.y + sy})) {
          best = std::min(best, solve_pair(tx, ty, h));
        } else {
          best = std::min({best, tx + h, ty + h});
        }
      }
    }
    const double d1 = std::min(known_diag(c, 1, 1), known_diag(c, -1, -1));
    const double d2 = std::min(known_diag(c, 1, -1), known_diag(c, -1, 1));
    best = std::min(best, solve_pair(d1, d2, diag));
    return best;
  };

  while (!band.empty()) {
    const auto [t, i] = band.top();
    band.pop();
    if (state[i] == State::Known || t > field.T[i]) continue;
    state[i] = State::Known;
    const Cell c = shape.cell_at(i);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Cell n{c.x + dx, c.y + dy};
        if (!mask.ok(n)) continue;
        const std::size_t j = shape.index(n);
        if (state[j] == State::Known) continue;
        const double candidate = update(n);
        if (candidate < field.T[j]) {
          field.T[j] = candidate;
          state[j] = State::Trial;
          band.emplace(candidate, j);
        }
      }
    }
  }
  return field;
}

}  // namespace navvlm
