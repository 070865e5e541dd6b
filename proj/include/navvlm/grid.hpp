#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace navvlm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when a caller violates an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Integer cell coordinate. x is the column, y the row. Cells order row-major
/// (y first), which is the tie-break order used throughout.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  friend std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

using CellSet = std::set<Cell>;

std::string to_string(const Cell& c);

/// Shortest round-trip decimal text of a double.
std::string format_number(double v);

/// Point in the scene frame, meters. Cell (x, y) covers
/// [x*res, (x+1)*res) x [y*res, (y+1)*res).
struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct GridShape {
  int width = 0;
  int height = 0;
  double resolution = 0.05;

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] bool contains(const Cell& c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  [[nodiscard]] std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  [[nodiscard]] Cell cell_at(std::size_t i) const {
    return Cell{static_cast<int>(i % static_cast<std::size_t>(width)),
                static_cast<int>(i / static_cast<std::size_t>(width))};
  }
  [[nodiscard]] Cell cell_of(const Point2& p) const {
    return Cell{static_cast<int>(std::floor(p.x / resolution)), static_cast<int>(std::floor(p.y / resolution))};
  }
  [[nodiscard]] Point2 center(const Cell& c) const {
    return Point2{(c.x + 0.5) * resolution, (c.y + 0.5) * resolution};
  }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Per-cell traversable flag over a grid.
struct TraversabilityMask {
  GridShape shape;
  std::vector<std::uint8_t> traversable;

  TraversabilityMask() = default;
  TraversabilityMask(GridShape s, bool value)
      : shape(s), traversable(s.size(), static_cast<std::uint8_t>(value ? 1 : 0)) {}

  [[nodiscard]] bool ok(const Cell& c) const { return shape.contains(c) && traversable[shape.index(c)] != 0; }
  void set(const Cell& c, bool value) { traversable[shape.index(c)] = static_cast<std::uint8_t>(value ? 1 : 0); }
};

/// cos/sin of an angle in degrees, exact at multiples of 90.
double cos_deg(double degrees);
double sin_deg(double degrees);

/// Wraps into [0, 360).
double normalize_heading(double degrees);
/// Wraps into (-180, 180].
double normalize_bearing(double degrees);

/// Grid traversal (Amanatides & Woo) of the segment origin + t*dir,
/// t in [0, max_t], dir unit length. `visit(cell, t_enter)` is called for
/// every in-bounds cell in order; returning false stops the walk. The walk
/// also stops when the ray leaves the grid.
template <typename Visit>
void traverse_ray(const GridShape& shape, const Point2& origin, double dir_x, double dir_y, double max_t,
                  Visit&& visit) {
  const double res = shape.resolution;
  Cell c = shape.cell_of(origin);
  if (!shape.contains(c)) return;

  const int step_x = dir_x > 0 ? 1 : (dir_x < 0 ? -1 : 0);
  const int step_y = dir_y > 0 ? 1 : (dir_y < 0 ? -1 : 0);
  auto first_crossing = [res](double p, double d, int cell, int step) {
    if (step == 0) return kInfinity;
    const double boundary = (step > 0 ? cell + 1 : cell) * res;
    return (boundary - p) / d;
  };
  double t_max_x = first_crossing(origin.x, dir_x, c.x, step_x);
  double t_max_y = first_crossing(origin.y, dir_y, c.y, step_y);

  double t_enter = 0.0;
  while (true) {
    if (!visit(c, t_enter)) return;
    if (t_max_x < t_max_y) {
      t_enter = t_max_x;
      c.x += step_x;
      t_max_x = first_crossing(origin.x, dir_x, c.x, step_x);
    } else {
      t_enter = t_max_y;
      c.y += step_y;
      t_max_y = first_crossing(origin.y, dir_y, c.y, step_y);
    }
    if (t_enter > max_t || !shape.contains(c)) return;
  }
}

}  // namespace navvlm
