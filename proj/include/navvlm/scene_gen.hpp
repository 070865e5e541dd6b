#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "navvlm/scene.hpp"

namespace navvlm {

struct SceneGenConfig {
  int size = 64;                // cells per side
  double obstacle_density = 0.25;  // target obstacle fraction of the interior, [0, 0.4]
  double resolution = 0.1;
  double agent_radius = 0.15;
  double min_start_goal_distance = 2.5;  // meters, geodesic
  int max_retries = 50;
};

struct GeneratedEpisode {
  SceneMap scene;
  EpisodeSpec episode;
};

class SceneGenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Room-and-furniture layout: border walls, up to two interior walls with
/// doorways, then boxes pushed flush against a wall or another box until the
/// target density is met or no box fits. Start and goal are drawn inside the largest
/// region that stays connected once obstacles are inflated by the agent
/// radius, and reachability is checked before returning. Deterministic in
/// (config, seed, index).
GeneratedEpisode generate_scene(const SceneGenConfig& config, std::uint64_t seed, int index);

}  // namespace navvlm
