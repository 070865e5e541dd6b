#include <doctest.h>

#include "helpers.hpp"
#include "navvlm/mapping.hpp"

using namespace navvlm;

namespace {

DepthScan uniform_scan(int n, double fov, double range, bool hit) {
  DepthScan scan;
  scan.fov = fov;
  scan.max_range = 5.0;
  scan.ranges.assign(static_cast<std::size_t>(n), range);
  scan.hit.assign(static_cast<std::size_t>(n), hit);
  return scan;
}

}  // namespace

TEST_CASE("integrate_scan: single hit ray at 0.05 m") {
  OccupancyGrid grid(GridShape{40, 3, 0.05});
  const AgentPose pose{0.025, 0.075, 0.0};  // center of cell (0, 1)
  integrate_scan(grid, pose, uniform_scan(1, 90.0, 1.0, true));
  for (int x = 0; x < 20; ++x) CHECK(grid.at({x, 1}) == Occupancy::Free);
  CHECK(grid.at({20, 1}) == Occupancy::Obstacle);
  CHECK(grid.at({21, 1}) == Occupancy::Unknown);
  CHECK(grid.count(Occupancy::Free) == 20);
  CHECK(grid.count(Occupancy::Obstacle) == 1);
}

TEST_CASE("integrate_scan: no-hit ray writes only Free") {
  OccupancyGrid grid(GridShape{120, 3, 0.05});
  integrate_scan(grid, AgentPose{0.025, 0.075, 0.0}, uniform_scan(1, 90.0, 5.0, false));
  CHECK(grid.count(Occupancy::Obstacle) == 0);
  // endpoint 5.025 m lies in cell 100
  CHECK(grid.count(Occupancy::Free) == 101);
  CHECK(grid.at({100, 1}) == Occupancy::Free);
  CHECK(grid.at({101, 1}) == Occupancy::Unknown);
}

TEST_CASE("integrate_scan: idempotent, and known cells stay known") {
  const SceneMap s = testing::fixture("maze16.scene");
  OccupancyGrid grid(s.shape());
  const AgentPose pose{1.1, 0.6, 60.0};
  const DepthScan scan = raycast_depth(s, pose, 120, 90.0, 5.0);
  integrate_scan(grid, pose, scan);
  const OccupancyGrid once = grid;
  integrate_scan(grid, pose, scan);
  CHECK(grid == once);

  std::size_t unknown = grid.count(Occupancy::Unknown);
  AgentPose p = pose;
  for (int i = 0; i < 12; ++i) {
    p = step(s, p, Action::TurnLeft).pose;
    const OccupancyGrid before = grid;
    integrate_scan(grid, p, raycast_depth(s, p, 120, 90.0, 5.0));
    CHECK(grid.count(Occupancy::Unknown) <= unknown);
    unknown = grid.count(Occupancy::Unknown);
    for (std::size_t k = 0; k < grid.cells().size(); ++k) {
      if (before.cells()[k] != Occupancy::Unknown) CHECK(grid.cells()[k] != Occupancy::Unknown);
    }
  }
}

TEST_CASE("integrate_scan: observed cells agree with ground truth") {
  const SceneMap s = testing::fixture("corner.scene");
  OccupancyGrid grid(s.shape());
  const AgentPose pose{2.35, 1.05, 90.0};
  integrate_scan(grid, pose, raycast_depth(s, pose, 120, 90.0, 5.0));
  for (std::size_t k = 0; k < grid.cells().size(); ++k) {
    const Cell c = s.shape().cell_at(k);
    if (grid.at(c) == Occupancy::Free) CHECK(s.is_free(c));
    if (grid.at(c) == Occupancy::Obstacle) CHECK_FALSE(s.is_free(c));
  }
}

TEST_CASE("render_guidance_region: thirds of the fov") {
  const ImageRegion left = render_guidance_region(Guidance::Left, 90.0);
  CHECK(left.min_bearing == 15.0);
  CHECK(left.max_bearing == 45.0);
  CHECK(left.near == 1.0);
  CHECK(left.far == 3.0);
  const ImageRegion fwd = render_guidance_region(Guidance::Forward, 90.0);
  CHECK(fwd.min_bearing == -15.0);
  CHECK(fwd.max_bearing == 15.0);
  const ImageRegion right = render_guidance_region(Guidance::Right, 120.0);
  CHECK(right.min_bearing == -60.0);
  CHECK(right.max_bearing == -20.0);
  CHECK_THROWS_AS(render_guidance_region(Guidance::Explore, 90.0), ContractError);
  CHECK_THROWS_AS(render_guidance_region(Guidance::NoInfo, 90.0), ContractError);
}

TEST_CASE("project_guidance: open corridor lands about 3 m ahead") {
  OccupancyGrid grid(GridShape{120, 60, 0.05});
  const AgentPose pose{1.0, 1.5, 0.0};
  const DepthScan scan = uniform_scan(120, 90.0, 5.0, false);
  const auto goal = project_guidance(grid, pose, scan, render_guidance_region(Guidance::Forward, 90.0), 3);
  REQUIRE(goal.has_value());
  CHECK(goal->kind == GoalKind::Guided);
  CHECK(goal->created_at == 3);
  const double slack = 2 * 0.05 * std::sqrt(2.0);
  for (const Cell& c : goal->cells) {
    const Point2 p = grid.shape().center(c);
    CHECK(std::abs(distance(p, pose.position()) - 3.0) <= slack);
    CHECK(p.x > pose.x);
    CHECK(grid.guidance_step(c) == 3);
  }
  CHECK(goal->cells.count(grid.shape().cell_of({4.0 - 1e-6, 1.5})) == 1);
}

TEST_CASE("project_guidance: wall closer than the near edge projects nothing") {
  OccupancyGrid grid(GridShape{60, 60, 0.05});
  const OccupancyGrid untouched = grid;
  const auto goal = project_guidance(grid, AgentPose{1.0, 1.5, 0.0}, uniform_scan(120, 90.0, 0.5, true),
                                     render_guidance_region(Guidance::Forward, 90.0), 0);
  CHECK_FALSE(goal.has_value());
  CHECK(grid == untouched);
}

TEST_CASE("project_guidance: newer projection clears older cells") {
  OccupancyGrid grid(GridShape{120, 120, 0.05});
  const DepthScan scan = uniform_scan(120, 90.0, 5.0, false);
  REQUIRE(project_guidance(grid, AgentPose{1.0, 3.0, 0.0}, scan, render_guidance_region(Guidance::Left, 90.0), 5));
  const CellSet first = grid.guidance_cells();
  REQUIRE(project_guidance(grid, AgentPose{1.0, 3.0, 0.0}, scan, render_guidance_region(Guidance::Right, 90.0), 9));
  const CellSet second = grid.guidance_cells();
  REQUIRE_FALSE(second.empty());
  for (const Cell& c : second) CHECK(grid.guidance_step(c) == 9);
  for (const Cell& c : first) {
    if (!second.count(c)) CHECK_FALSE(grid.guidance_step(c).has_value());
  }
}

TEST_CASE("project_guidance: region outside the fov is a contract error") {
  OccupancyGrid grid(GridShape{60, 60, 0.05});
  CHECK_THROWS_AS(project_guidance(grid, AgentPose{1.0, 1.5, 0.0}, uniform_scan(10, 60.0, 5.0, false),
                                   render_guidance_region(Guidance::Left, 90.0), 0),
                  ContractError);
}

TEST_CASE("frontier_cells") {
  OccupancyGrid unknown(GridShape{5, 5, 0.1});
  CHECK(frontier_cells(unknown).empty());

  OccupancyGrid ring(GridShape{5, 5, 0.1});
  for (int y = 1; y <= 3; ++y) {
    for (int x = 1; x <= 3; ++x) ring.set({x, y}, Occupancy::Free);
  }
  const CellSet f = frontier_cells(ring);
  CHECK(f.size() == 8);
  CHECK_FALSE(f.count(Cell{2, 2}));
  CHECK(f.count(Cell{1, 1}));
  CHECK(f.count(Cell{3, 2}));

  OccupancyGrid known(GridShape{5, 5, 0.1});
  for (std::size_t i = 0; i < known.shape().size(); ++i) {
    known.set(known.shape().cell_at(i), i % 3 ? Occupancy::Free : Occupancy::Obstacle);
  }
  CHECK(frontier_cells(known).empty());
}

TEST_CASE("dilate_obstacles") {
  OccupancyGrid grid(GridShape{7, 7, 0.1});
  grid.set({3, 3}, Occupancy::Obstacle);
  grid.set({0, 0}, Occupancy::Free);

  const TraversabilityMask zero = dilate_obstacles(grid, 0.0);
  for (std::size_t i = 0; i < grid.shape().size(); ++i) {
    const Cell c = grid.shape().cell_at(i);
    CHECK(zero.ok(c) == (grid.at(c) != Occupancy::Obstacle));
  }

  const TraversabilityMask one = dilate_obstacles(grid, 0.1);
  CellSet blocked;
  for (std::size_t i = 0; i < grid.shape().size(); ++i) {
    if (!one.traversable[i]) blocked.insert(grid.shape().cell_at(i));
  }
  CHECK(blocked == CellSet{{3, 2}, {2, 3}, {3, 3}, {4, 3}, {3, 4}});

  const TraversabilityMask all = dilate_obstacles(grid, 10.0);
  for (auto t : all.traversable) CHECK(t == 0);
  CHECK_THROWS_AS(dilate_obstacles(grid, -1.0), ContractError);
}

TEST_CASE("map exports") {
  OccupancyGrid grid(GridShape{3, 2, 0.5});
  grid.set({0, 0}, Occupancy::Free);
  grid.set({1, 0}, Occupancy::Obstacle);
  grid.mark_guidance({2, 1}, 4);
  CHECK(to_pgm(grid) == "P2\n3 2\n255\n255 0 128\n128 128 128\n");
  CHECK(map_sidecar(grid, {{0.05, 0.05}}) == "# guidance\n1.25 0.75\n# trajectory\n0.05 0.05\n");
}
