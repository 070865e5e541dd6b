#include "navvlm/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace navvlm {

OccupancyGrid::OccupancyGrid(GridShape shape)
    : shape_(shape), cells_(shape.size(), Occupancy::Unknown), guidance_(shape.size(), -1) {}

std::size_t OccupancyGrid::count(Occupancy o) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), o));
}

std::optional<int> OccupancyGrid::guidance_step(const Cell& c) const {
  const int s = guidance_[shape_.index(c)];
  if (s < 0) return std::nullopt;
  return s;
}

CellSet OccupancyGrid::guidance_cells() const {
  CellSet out;
  for (std::size_t i = 0; i < guidance_.size(); ++i) {
    if (guidance_[i] >= 0) out.insert(shape_.cell_at(i));
  }
  return out;
}

void OccupancyGrid::clear_guidance() { std::fill(guidance_.begin(), guidance_.end(), -1); }

void OccupancyGrid::mark_guidance(const Cell& c, int step) { guidance_[shape_.index(c)] = step; }

namespace {

// Nudge that places a hit endpoint inside the struck cell.
constexpr double kEndpointNudge = 1e-6;

}  // namespace

void integrate_scan(OccupancyGrid& grid, const AgentPose& pose, const DepthScan& scan) {
  const GridShape& shape = grid.shape();
  const Point2 origin = pose.position();
  if (!shape.contains(shape.cell_of(origin))) throw ContractError("pose lies outside the occupancy grid");

  std::vector<Cell> free_cells;
  std::vector<Cell> obstacle_cells;
  const double nudge = kEndpointNudge * shape.resolution;
  for (int i = 0; i < scan.n_rays(); ++i) {
    const double dir = pose.heading + scan.bearing(i);
    const double range = std::min(scan.ranges[static_cast<std::size_t>(i)], scan.max_range);
    const bool hit = scan.hit[static_cast<std::size_t>(i)];
    const double limit = hit ? range + nudge : range;
    std::optional<Cell> last;
    traverse_ray(shape, origin, cos_deg(dir), sin_deg(dir), limit, [&](const Cell& c, double t_enter) {
      if (t_enter > limit || (!hit && t_enter >= range && t_enter > 0.0)) return false;
      if (last) free_cells.push_back(*last);
      last = c;
      return true;
    });
    if (last) (hit ? obstacle_cells : free_cells).push_back(*last);
  }
  for (const Cell& c : free_cells) grid.set(c, Occupancy::Free);
  for (const Cell& c : obstacle_cells) grid.set(c, Occupancy::Obstacle);
}

ImageRegion render_guidance_region(Guidance guidance, double fov, GuidanceBand band) {
  const double third = fov / 6.0;
  ImageRegion region{0, 0, band.near, band.far};
  switch (guidance) {
    case Guidance::Left:
      region.min_bearing = third;
      region.max_bearing = fov / 2.0;
      return region;
    case Guidance::Forward:
      region.min_bearing = -third;
      region.max_bearing = third;
      return region;
    case Guidance::Right:
      region.min_bearing = -fov / 2.0;
      region.max_bearing = -third;
      return region;
    case Guidance::Explore:
    case Guidance::NoInfo:
      break;
  }
  throw ContractError("only Left, Right and Forward guidance can be rendered");
}

std::optional<ShortTermGoal> project_guidance(OccupancyGrid& grid, const AgentPose& pose, const DepthScan& scan,
                                              const ImageRegion& region, int step) {
  if (!(region.min_bearing < region.max_bearing) || !(region.near >= 0.0 && region.near < region.far)) {
    throw ContractError("invalid image region");
  }
  const double half = scan.fov / 2.0 + 1e-9;
  if (region.min_bearing < -half || region.max_bearing > half) throw ContractError("image region exceeds the fov");

  const GridShape& shape = grid.shape();
  const double eps = 1e-9;
  CellSet cells;
  for (int i = 0; i < scan.n_rays(); ++i) {
    const double b = scan.bearing(i);
    if (b < region.min_bearing - eps || b > region.max_bearing + eps) continue;
    const double range = scan.ranges[static_cast<std::size_t>(i)];
    if (range < region.near) continue;
    // Back off a hair so a hit lands in the last free cell, not the wall.
    const double d = std::min(range, region.far) - kEndpointNudge * shape.resolution;
    const double dir = pose.heading + b;
    const Cell center = shape.cell_of({pose.x + d * cos_deg(dir), pose.y + d * sin_deg(dir)});
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const Cell c{center.x + dx, center.y + dy};
        if (shape.contains(c)) cells.insert(c);
      }
    }
  }
  if (cells.empty()) return std::nullopt;

  grid.clear_guidance();
  for (const Cell& c : cells) grid.mark_guidance(c, step);
  return ShortTermGoal{std::move(cells), GoalKind::Guided, step, std::nullopt, false};
}

CellSet frontier_cells(const OccupancyGrid& grid) {
  const GridShape& shape = grid.shape();
  CellSet out;
  constexpr int kOffsets[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const Cell c{x, y};
      if (grid.at(c) != Occupancy::Free) continue;
      for (const auto& o : kOffsets) {
        const Cell n{x + o[0], y + o[1]};
        if (shape.contains(n) && grid.at(n) == Occupancy::Unknown) {
          out.insert(c);
          break;
        }
      }
    }
  }
  return out;
}

TraversabilityMask dilate_obstacles(const OccupancyGrid& grid, double radius) {
  if (!(radius >= 0.0)) throw ContractError("dilation radius must be nonnegative");
  const GridShape& shape = grid.shape();
  TraversabilityMask mask(shape, true);

  // Offsets whose center distance is within the radius, capped to the grid extent.
  const double r_cells = radius / shape.resolution;
  const int reach = static_cast<int>(std::min<double>(std::floor(r_cells + 1e-9), std::max(shape.width, shape.height)));
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      if (std::hypot(dx, dy) * shape.resolution <= radius + 1e-12) offsets.emplace_back(dx, dy);
    }
  }
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      if (grid.at({x, y}) != Occupancy::Obstacle) continue;
      for (const auto& [dx, dy] : offsets) {
        const Cell c{x + dx, y + dy};
        if (shape.contains(c)) mask.set(c, false);
      }
    }
  }
  return mask;
}

std::string to_pgm(const OccupancyGrid& grid) {
  const GridShape& shape = grid.shape();
  std::ostringstream out;
  out << "P2\n" << shape.width << ' ' << shape.height << "\n255\n";
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const Occupancy o = grid.at({x, y});
      out << (x ? " " : "") << (o == Occupancy::Obstacle ? 0 : (o == Occupancy::Unknown ? 128 : 255));
    }
    out << '\n';
  }
  return out.str();
}

std::string map_sidecar(const OccupancyGrid& grid, const std::vector<Point2>& trajectory) {
  std::string out = "# guidance\n";
  for (const Cell& c : grid.guidance_cells()) {
    const Point2 p = grid.shape().center(c);
    out += format_number(p.x) + " " + format_number(p.y) + "\n";
  }
  out += "# trajectory\n";
  for (const Point2& p : trajectory) out += format_number(p.x) + " " + format_number(p.y) + "\n";
  return out;
}

}  // namespace navvlm
