#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "navvlm/grid.hpp"

namespace navvlm {

enum class Terrain : std::uint8_t { Free, Obstacle };

struct GoalRegion {
  std::string label;
  char symbol = '?';
  CellSet cells;
};

/// Ground-truth world. Immutable once loaded.
class SceneMap {
 public:
  SceneMap() = default;
  SceneMap(std::string id, GridShape shape, std::vector<Terrain> cells, std::vector<GoalRegion> goals);

  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] const GridShape& shape() const { return shape_; }
  [[nodiscard]] int width() const { return shape_.width; }
  [[nodiscard]] int height() const { return shape_.height; }
  [[nodiscard]] double resolution() const { return shape_.resolution; }
  [[nodiscard]] const std::vector<GoalRegion>& goal_regions() const { return goals_; }

  /// Out-of-bounds cells count as not free.
  [[nodiscard]] bool is_free(const Cell& c) const;
  [[nodiscard]] bool is_free_point(const Point2& p) const { return is_free(shape_.cell_of(p)); }
  [[nodiscard]] Terrain at(const Cell& c) const { return cells_[shape_.index(c)]; }
  [[nodiscard]] std::size_t free_count() const;

  [[nodiscard]] const GoalRegion* find_goal(std::string_view label) const;
  /// Index into goal_regions() of the region owning `c`, or -1.
  [[nodiscard]] int goal_index_at(const Cell& c) const {
    return shape_.contains(c) ? goal_of_cell_[shape_.index(c)] : -1;
  }
  /// Free cells as a traversability mask.
  [[nodiscard]] const TraversabilityMask& free_mask() const { return free_mask_; }

  /// Serializes back into the scene text format.
  [[nodiscard]] std::string to_text() const;

 private:
  std::string id_;
  GridShape shape_;
  std::vector<Terrain> cells_;
  std::vector<GoalRegion> goals_;
  std::vector<int> goal_of_cell_;
  TraversabilityMask free_mask_;
};

class SceneParseError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, RaggedRows, GoalOnObstacle, UnknownSymbol, EmptyGrid, NoFreeCell, EmptyGoal };

  SceneParseError(Kind kind, int line, int column, const std::string& what);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

/// Parses the scene text format:
///   resolution <float>
///   goals <label>=<char>[,<label>=<char>...]   (optional)
///   <grid rows: '#' obstacle, '.' free, goal chars free + labeled>
SceneMap load_scene(std::string_view text, std::string id = {});
SceneMap load_scene_file(const std::filesystem::path& path);

struct AgentPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // degrees, [0, 360); 0 is +x, 90 is +y

  [[nodiscard]] Point2 position() const { return {x, y}; }
  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

enum class Action { Forward, TurnLeft, TurnRight, Stop };

std::string_view to_string(Action a);

inline constexpr double kForwardStep = 0.25;  // meters
inline constexpr double kTurnStep = 30.0;     // degrees

struct DepthScan {
  double fov = 90.0;
  double max_range = 5.0;
  std::vector<double> ranges;
  std::vector<bool> hit;

  [[nodiscard]] int n_rays() const { return static_cast<int>(ranges.size()); }
  /// Bearing of ray i relative to heading; ray 0 is leftmost at +fov/2.
  [[nodiscard]] double bearing(int i) const;
};

struct SensorConfig {
  int n_rays = 120;
  double fov = 90.0;
  double max_range = 5.0;
};

double ray_bearing(int i, int n_rays, double fov);

DepthScan raycast_depth(const SceneMap& scene, const AgentPose& pose, int n_rays, double fov, double max_range);
inline DepthScan raycast_depth(const SceneMap& scene, const AgentPose& pose, const SensorConfig& s) {
  return raycast_depth(scene, pose, s.n_rays, s.fov, s.max_range);
}

struct StepOutcome {
  AgentPose pose;
  bool collision = false;
};

StepOutcome step(const SceneMap& scene, const AgentPose& pose, Action action);

/// Shortest obstacle-free path length from the pose's cell to the nearest
/// target cell over the ground-truth free cells; +infinity if unreachable.
double geodesic_distance(const SceneMap& scene, const AgentPose& from, const CellSet& targets);

/// True when every cell crossed by the segment a-b is free.
bool line_of_sight(const SceneMap& scene, const Point2& a, const Point2& b);

/// Labels of goal regions with at least one cell crossed by a ray of `scan`.
std::vector<std::string> visible_labels(const SceneMap& scene, const AgentPose& pose, const DepthScan& scan);

/// Euclidean distance from a point to the nearest cell center of `cells`.
double distance_to_cells(const GridShape& shape, const Point2& p, const CellSet& cells);

struct EpisodeSpec {
  std::string scene_id;
  AgentPose start;
  std::string goal_text;
  std::string goal_label;
  std::uint64_t seed = 0;
};

/// Throws ContractError when the episode does not fit the scene.
void validate_episode(const SceneMap& scene, const EpisodeSpec& spec);

}  // namespace navvlm
