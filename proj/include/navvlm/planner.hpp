#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "navvlm/eikonal.hpp"
#include "navvlm/mapping.hpp"
#include "navvlm/scene.hpp"

namespace navvlm {

struct PathPlan {
  std::vector<Cell> waypoints;
};

class UnreachableError : public std::runtime_error {
 public:
  explicit UnreachableError(const Cell& start);
};

/// Greedy descent over 8-neighbors (scan order E, N, W, S, NE, NW, SW, SE;
/// N is +y) to the neighbor of smallest T, which must be strictly smaller.
/// Diagonal moves never squeeze between two non-traversable cells. Throws
/// UnreachableError if T(start) is infinite.
PathPlan extract_path(const DistanceField& field, const Cell& start);

struct ActionPolicy {
  double lookahead = 0.125;      // meters
  double turn_threshold = 15.0;  // degrees, inclusive for Forward
};

/// Steers toward the first waypoint at least `lookahead` away. When every
/// waypoint is closer than that the agent is on the goal and turns left to look
/// around.
Action next_action(const AgentPose& pose, const GridShape& shape, const PathPlan& plan, ActionPolicy policy = {});

/// Nearest frontier by travel time from the agent over `mask` (ties
/// row-major), returned with its in-bounds 8-neighborhood. Degenerate goal at
/// the agent cell when no frontier is reachable.
ShortTermGoal select_frontier(const OccupancyGrid& grid, const TraversabilityMask& mask, const AgentPose& pose,
                              const CellSet& frontiers, int step = 0);

/// Distance-field dump: finite T scaled to 0..254, +infinity as 255.
std::string to_pgm(const DistanceField& field);

}  // namespace navvlm
