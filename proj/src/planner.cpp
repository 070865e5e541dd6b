#include "navvlm/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace navvlm {

UnreachableError::UnreachableError(const Cell& start)
    : std::runtime_error("no finite travel time at " + to_string(start)) {}

namespace {

// E, N, W, S, NE, NW, SW, SE with N = +y.
constexpr int kScan[8][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

}  // namespace

PathPlan extract_path(const DistanceField& field, const Cell& start) {
  if (!std::isfinite(field.at(start))) throw UnreachableError(start);
  PathPlan plan;
  Cell current = start;
  plan.waypoints.push_back(current);
  auto finite = [&](const Cell& c) { return std::isfinite(field.at(c)); };
  while (field.at(current) > 0.0) {
    double best = field.at(current);
    std::optional<Cell> next;
    for (const auto& o : kScan) {
      const Cell n{current.x + o[0], current.y + o[1]};
      if (!finite(n)) continue;
      if (o[0] != 0 && o[1] != 0 && !(finite({current.x + o[0], current.y}) && finite({current.x, current.y + o[1]}))) {
        continue;
      }
      if (field.at(n) < best) {
        best = field.at(n);
        next = n;
      }
    }
    // Finite non-source cells always have a strictly lower usable neighbor.
    if (!next) throw UnreachableError(current);
    current = *next;
    plan.waypoints.push_back(current);
  }
  return plan;
}

Action next_action(const AgentPose& pose, const GridShape& shape, const PathPlan& plan, ActionPolicy policy) {
  if (plan.waypoints.empty()) throw ContractError("next_action needs a nonempty plan");
  const Point2 here = pose.position();
  const Cell own = shape.cell_of(here);
  const Cell* target = nullptr;
  // The agent's own cell never counts: on coarse grids its center can sit past
  // the lookahead, and steering at it runs the agent into the far wall.
  for (const Cell& w : plan.waypoints) {
    if (w != own && distance(here, shape.center(w)) >= policy.lookahead) {
      target = &w;
      break;
    }
  }
  if (target == nullptr) return Action::TurnLeft;
  const Point2 p = shape.center(*target);
  const double bearing = std::atan2(p.y - here.y, p.x - here.x) * 180.0 / std::numbers::pi;
  const double error = normalize_bearing(bearing - pose.heading);
  if (std::abs(error) <= policy.turn_threshold) return Action::Forward;
  return error > 0 ? Action::TurnLeft : Action::TurnRight;
}

ShortTermGoal select_frontier(const OccupancyGrid& grid, const TraversabilityMask& mask, const AgentPose& pose,
                              const CellSet& frontiers, int step) {
  const GridShape& shape = grid.shape();
  const Cell agent = shape.cell_of(pose.position());
  ShortTermGoal degenerate{{agent}, GoalKind::Frontier, step, agent, true};
  if (frontiers.empty() || !shape.contains(agent)) return degenerate;

  TraversabilityMask m = mask;
  m.set(agent, true);
  const DistanceField field = fmm_solve(m, {agent});
  std::optional<Cell> best;
  double best_t = kInfinity;
  for (const Cell& f : frontiers) {  // row-major order breaks ties
    const double t = field.at(f);
    if (t < best_t) {
      best_t = t;
      best = f;
    }
  }
  if (!best) return degenerate;

  ShortTermGoal goal{{}, GoalKind::Frontier, step, *best, false};
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const Cell c{best->x + dx, best->y + dy};
      if (shape.contains(c)) goal.cells.insert(c);
    }
  }
  return goal;
}

std::string to_pgm(const DistanceField& field) {
  double t_max = 0.0;
  for (double t : field.T) {
    if (std::isfinite(t)) t_max = std::max(t_max, t);
  }
  std::ostringstream out;
  out << "P2\n" << field.shape.width << ' ' << field.shape.height << "\n255\n";
  for (int y = 0; y < field.shape.height; ++y) {
    for (int x = 0; x < field.shape.width; ++x) {
      const double t = field.at({x, y});
      int v = 255;
      if (std::isfinite(t)) v = t_max > 0 ? static_cast<int>(std::floor(t / t_max * 254.0)) : 0;
      out << (x ? " " : "") << v;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace navvlm
