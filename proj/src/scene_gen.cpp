#include "navvlm/scene_gen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include "navvlm/eikonal.hpp"
#include "navvlm/mapping.hpp"

namespace navvlm {

namespace {

constexpr int kBoxGap = 4;
constexpr double kMinStartGoalEuclid = 1.5;

struct GoalName {
  const char* label;
  const char* text;
  char symbol;
};

constexpr std::array<GoalName, 8> kGoals{{{"kitchen", "a corner in the kitchen", 'K'},
                                          {"bed", "somewhere I can rest", 'B'},
                                          {"toilet", "the toilet", 'W'},
                                          {"sofa", "the sofa in the living room", 'S'},
                                          {"desk", "apple on white desk", 'D'},
                                          {"plant", "a potted plant", 'P'},
                                          {"tv", "the tv", 'T'},
                                          {"laboratory", "laboratory 208", 'L'}}};

// Portable bounded draw; identical across standard libraries.
int uniform(std::mt19937_64& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

struct Layout {
  GridShape shape;
  std::vector<Terrain> cells;

  [[nodiscard]] bool obstacle(int x, int y) const { return cells[shape.index({x, y})] == Terrain::Obstacle; }
  void block(int x, int y) { cells[shape.index({x, y})] = Terrain::Obstacle; }
};

Layout make_layout(const SceneGenConfig& config, std::mt19937_64& rng) {
  const int n = config.size;
  Layout layout{GridShape{n, n, config.resolution}, std::vector<Terrain>(static_cast<std::size_t>(n) * n, Terrain::Free)};
  for (int i = 0; i < n; ++i) {
    layout.block(i, 0);
    layout.block(i, n - 1);
    layout.block(0, i);
    layout.block(n - 1, i);
  }
  const int interior = (n - 2) * (n - 2);
  const int target = static_cast<int>(std::lround(config.obstacle_density * interior));
  if (target == 0) return layout;

  // doorway cells are kept clear of furniture like boxes are kept from each other
  std::vector<std::uint8_t> keep_out(layout.cells.size(), 0);

  // Two crossing walls split the room into four, with one doorway per wall segment.
  if (config.obstacle_density >= 0.1 && n >= 24) {
    const int vx = uniform(rng, n / 3, 2 * n / 3);
    const int hy = uniform(rng, n / 3, 2 * n / 3);
    for (int i = 1; i < n - 1; ++i) {
      layout.block(vx, i);
      layout.block(i, hy);
    }
    auto door = [&](int lo, int hi, auto&& at) {
      const int width = std::min(uniform(rng, 6, 10), hi - lo - 1);
      if (width < 5) return;
      const int start = uniform(rng, lo + 1, hi - width);
      for (int k = start; k < start + width; ++k) {
        const std::size_t i = layout.shape.index(at(k));
        layout.cells[i] = Terrain::Free;
        keep_out[i] = 1;
      }
    };
    auto on_v = [&](int y) { return Cell{vx, y}; };
    auto on_h = [&](int x) { return Cell{x, hy}; };
    door(0, hy, on_v);
    door(hy, n - 1, on_v);
    door(0, vx, on_h);
    door(vx, n - 1, on_h);
  }
  int placed = static_cast<int>(std::count(layout.cells.begin(), layout.cells.end(), Terrain::Obstacle)) - 4 * (n - 1);

  // Boxes either sit flush against a wall or another box, or keep kBoxGap
  // free cells to every obstacle. Doorways always get the full gap.
  const int max_side = std::max(2, std::min(12, n / 4));
  for (int attempt = 0; attempt < 20000 && placed < target; ++attempt) {
    const int w = uniform(rng, 2, max_side);
    const int h = uniform(rng, 2, max_side);
    if (w > n - 2 || h > n - 2) continue;
    const int x0 = uniform(rng, 1, n - 1 - w);
    const int y0 = uniform(rng, 1, n - 1 - h);
    bool clear = true;
    int wall_gap = kBoxGap + 1;  // Chebyshev distance to the nearest obstacle
    for (int y = y0 - kBoxGap; y < y0 + h + kBoxGap && clear; ++y) {
      for (int x = x0 - kBoxGap; x < x0 + w + kBoxGap; ++x) {
        if (!layout.shape.contains({x, y})) continue;
        const std::size_t i = layout.shape.index({x, y});
        if (keep_out[i]) {
          clear = false;
          break;
        }
        if (layout.cells[i] == Terrain::Obstacle) {
          const int dx = x < x0 ? x0 - x : (x >= x0 + w ? x - (x0 + w - 1) : 0);
          const int dy = y < y0 ? y0 - y : (y >= y0 + h ? y - (y0 + h - 1) : 0);
          wall_gap = std::min(wall_gap, std::max(dx, dy));
        }
      }
    }
    if (!clear || wall_gap != 1) continue;
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        layout.block(x, y);
      }
    }
    placed += w * h;
  }
  return layout;
}

std::vector<int> largest_component(const TraversabilityMask& mask) {
  const GridShape& shape = mask.shape;
  std::vector<int> label(shape.size(), -1);
  std::vector<int> best;
  int next = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (!mask.traversable[i] || label[i] >= 0) continue;
    std::vector<int> members;
    std::deque<std::size_t> queue{i};
    label[i] = next;
    while (!queue.empty()) {
      const std::size_t j = queue.front();
      queue.pop_front();
      members.push_back(static_cast<int>(j));
      const Cell c = shape.cell_at(j);
      for (const Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}}) {
        if (!mask.ok(n) || label[shape.index(n)] >= 0) continue;
        label[shape.index(n)] = next;
        queue.push_back(shape.index(n));
      }
    }
    if (members.size() > best.size()) best = std::move(members);
    ++next;
  }
  return best;
}

std::optional<GeneratedEpisode> place_episode(const Layout& layout, const SceneGenConfig& config,
                                              std::mt19937_64& rng, int index) {
  const GridShape& shape = layout.shape;
  OccupancyGrid truth(shape);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    truth.set(shape.cell_at(i), layout.cells[i] == Terrain::Free ? Occupancy::Free : Occupancy::Obstacle);
  }
  const TraversabilityMask mask = dilate_obstacles(truth, config.agent_radius);
  const std::vector<int> component = largest_component(mask);
  if (component.size() < 30) return std::nullopt;
  std::vector<std::uint8_t> in_component(shape.size(), 0);
  for (int i : component) in_component[static_cast<std::size_t>(i)] = 1;

  // Goal: a 3x3 free patch centered on a cell of the main component.
  const Cell center = shape.cell_at(static_cast<std::size_t>(component[static_cast<std::size_t>(
      uniform(rng, 0, static_cast<int>(component.size()) - 1))]));
  CellSet goal_cells;
  CellSet goal_sources;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const Cell c{center.x + dx, center.y + dy};
      if (!shape.contains(c) || layout.cells[shape.index(c)] != Terrain::Free) continue;
      goal_cells.insert(c);
      if (in_component[shape.index(c)]) goal_sources.insert(c);
    }
  }
  const DistanceField field = fmm_solve(mask, goal_sources);

  std::vector<Cell> starts;
  for (int i : component) {
    const Cell c = shape.cell_at(static_cast<std::size_t>(i));
    if (field.at(c) >= config.min_start_goal_distance &&
        distance_to_cells(shape, shape.center(c), goal_cells) > kMinStartGoalEuclid) {
      starts.push_back(c);
    }
  }
  if (starts.empty()) return std::nullopt;
  const Cell start = starts[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(starts.size()) - 1))];
  const double heading = 30.0 * uniform(rng, 0, 11);
  const GoalName& name = kGoals[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(kGoals.size()) - 1))];

  std::array<char, 32> id{};
  std::snprintf(id.data(), id.size(), "scene_%04d", index);
  SceneMap scene(id.data(), shape, layout.cells, {GoalRegion{name.label, name.symbol, goal_cells}});
  EpisodeSpec spec;
  spec.scene_id = scene.id();
  const Point2 p = shape.center(start);
  spec.start = AgentPose{p.x, p.y, heading};
  spec.goal_text = name.text;
  spec.goal_label = name.label;
  spec.seed = rng();

  if (!std::isfinite(geodesic_distance(scene, spec.start, goal_cells))) return std::nullopt;
  return GeneratedEpisode{std::move(scene), std::move(spec)};
}

}  // namespace

GeneratedEpisode generate_scene(const SceneGenConfig& config, std::uint64_t seed, int index) {
  if (config.size < 8) throw ContractError("scene size must be at least 8");
  if (!(config.obstacle_density >= 0.0 && config.obstacle_density <= 0.4)) {
    throw ContractError("obstacle density must lie in [0, 0.4]");
  }
  if (!(config.resolution > 0)) throw ContractError("resolution must be positive");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const Layout layout = make_layout(config, rng);
    if (auto generated = place_episode(layout, config, rng, index)) return std::move(*generated);
  }
  throw SceneGenError("could not generate a scene with a reachable goal after " +
                      std::to_string(config.max_retries) + " attempts");
}

}  // namespace navvlm
