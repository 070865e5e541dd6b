#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "navvlm/grid.hpp"
#include "navvlm/guidance.hpp"
#include "navvlm/scene.hpp"

namespace navvlm {

enum class Occupancy : std::uint8_t { Unknown, Free, Obstacle };

/// The agent's top-down map plus the guidance layer.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  explicit OccupancyGrid(GridShape shape);

  [[nodiscard]] const GridShape& shape() const { return shape_; }
  [[nodiscard]] Occupancy at(const Cell& c) const { return cells_[shape_.index(c)]; }
  void set(const Cell& c, Occupancy o) { cells_[shape_.index(c)] = o; }
  [[nodiscard]] const std::vector<Occupancy>& cells() const { return cells_; }
  [[nodiscard]] std::size_t count(Occupancy o) const;

  /// Step index at which a cell was marked as guidance, or nullopt.
  [[nodiscard]] std::optional<int> guidance_step(const Cell& c) const;
  [[nodiscard]] CellSet guidance_cells() const;
  void clear_guidance();
  void mark_guidance(const Cell& c, int step);

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  GridShape shape_;
  std::vector<Occupancy> cells_;
  std::vector<int> guidance_;  // -1 when unmarked
};

/// Angular sector relative to heading (positive is left) and a range band.
struct ImageRegion {
  double min_bearing = 0.0;
  double max_bearing = 0.0;
  double near = 1.0;
  double far = 3.0;
};

enum class GoalKind { Guided, Frontier };

struct ShortTermGoal {
  CellSet cells;
  GoalKind kind = GoalKind::Frontier;
  int created_at = 0;
  // Frontier cell the goal was built around; unset for guided goals.
  std::optional<Cell> anchor;
  // Frontier selection found nothing reachable; cells holds the agent cell.
  bool degenerate = false;
};

/// Fuses one scan. Cells before each ray's endpoint become Free; the endpoint
/// cell becomes Obstacle when the ray hit. Within a scan obstacle writes are
/// applied after free writes.
void integrate_scan(OccupancyGrid& grid, const AgentPose& pose, const DepthScan& scan);

struct GuidanceBand {
  double near = 1.0;
  double far = 3.0;
};

/// Horizontal FOV thirds: Left [fov/6, fov/2], Forward [-fov/6, fov/6],
/// Right [-fov/2, -fov/6]. Throws ContractError for Explore and NoInfo.
ImageRegion render_guidance_region(Guidance guidance, double fov, GuidanceBand band = {});

/// Projects a rendered region onto the map via the scan's rays. Rays shorter
/// than region.near are skipped; the others contribute the cell at
/// min(range, far) and its 8-neighbors. Clears guidance from older steps
/// first. Returns nullopt, leaving the grid untouched, when no ray projects.
std::optional<ShortTermGoal> project_guidance(OccupancyGrid& grid, const AgentPose& pose, const DepthScan& scan,
                                              const ImageRegion& region, int step);

/// Free cells with at least one Unknown 4-neighbor.
CellSet frontier_cells(const OccupancyGrid& grid);

/// Non-traversable: every cell whose center is within `radius` of an
/// Obstacle cell center. Unknown cells stay traversable.
TraversabilityMask dilate_obstacles(const OccupancyGrid& grid, double radius);

/// Plain PGM (P2): 0 obstacle, 128 unknown, 255 free.
std::string to_pgm(const OccupancyGrid& grid);

/// Sidecar listing guidance cell centers then the trajectory, `x y` per line.
std::string map_sidecar(const OccupancyGrid& grid, const std::vector<Point2>& trajectory);

}  // namespace navvlm
