#include "navvlm/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "navvlm/eikonal.hpp"

namespace navvlm {

SceneMap::SceneMap(std::string id, GridShape shape, std::vector<Terrain> cells, std::vector<GoalRegion> goals)
    : id_(std::move(id)), shape_(shape), cells_(std::move(cells)), goals_(std::move(goals)) {
  if (shape_.resolution <= 0) throw ContractError("scene resolution must be positive");
  if (cells_.size() != shape_.size()) throw ContractError("scene cell count does not match its shape");
  goal_of_cell_.assign(shape_.size(), -1);
  for (std::size_t g = 0; g < goals_.size(); ++g) {
    if (goals_[g].label.empty()) throw ContractError("goal label must be nonempty");
    for (const Cell& c : goals_[g].cells) {
      if (!shape_.contains(c) || at(c) != Terrain::Free) {
        throw ContractError("goal cell " + to_string(c) + " of '" + goals_[g].label + "' is not a free cell");
      }
      goal_of_cell_[shape_.index(c)] = static_cast<int>(g);
    }
  }
  free_mask_ = TraversabilityMask(shape_, false);
  for (std::size_t i = 0; i < cells_.size(); ++i) free_mask_.traversable[i] = cells_[i] == Terrain::Free ? 1 : 0;
  if (free_count() == 0) throw ContractError("scene has no free cell");
}

bool SceneMap::is_free(const Cell& c) const { return shape_.contains(c) && at(c) == Terrain::Free; }

std::size_t SceneMap::free_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), Terrain::Free));
}

const GoalRegion* SceneMap::find_goal(std::string_view label) const {
  for (const auto& g : goals_) {
    if (g.label == label) return &g;
  }
  return nullptr;
}

std::string SceneMap::to_text() const {
  std::string out = "resolution " + format_number(shape_.resolution) + "\n";
  if (!goals_.empty()) {
    out += "goals ";
    for (std::size_t g = 0; g < goals_.size(); ++g) {
      if (g) out += ",";
      out += goals_[g].label + "=" + goals_[g].symbol;
    }
    out += "\n";
  }
  for (int y = 0; y < shape_.height; ++y) {
    for (int x = 0; x < shape_.width; ++x) {
      const Cell c{x, y};
      const int g = goal_index_at(c);
      out += g >= 0 ? goals_[static_cast<std::size_t>(g)].symbol : (at(c) == Terrain::Free ? '.' : '#');
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string kind_text(SceneParseError::Kind kind) {
  using K = SceneParseError::Kind;
  switch (kind) {
    case K::MalformedHeader: return "malformed header";
    case K::RaggedRows: return "ragged rows";
    case K::GoalOnObstacle: return "goal on obstacle";
    case K::UnknownSymbol: return "unknown symbol";
    case K::EmptyGrid: return "empty grid";
    case K::NoFreeCell: return "no free cell";
    case K::EmptyGoal: return "empty goal region";
  }
  return "parse error";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  return line.size() > keyword.size() && line.substr(0, keyword.size()) == keyword &&
         (line[keyword.size()] == ' ' || line[keyword.size()] == '\t');
}

[[noreturn]] void fail(SceneParseError::Kind kind, int line, int column, const std::string& detail) {
  throw SceneParseError(kind, line, column, detail);
}

}  // namespace

SceneParseError::SceneParseError(Kind kind, int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         kind_text(kind) + (what.empty() ? "" : ": " + what)),
      kind_(kind),
      line_(line),
      column_(column) {}

SceneMap load_scene(std::string_view text, std::string id) {
  using K = SceneParseError::Kind;

  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos <= text.size();) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  std::optional<double> resolution;
  struct Declared {
    std::string label;
    char symbol;
    int line;
    int column;
  };
  std::vector<Declared> declared;

  std::size_t i = 0;
  for (; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    const int lineno = static_cast<int>(i) + 1;
    if (trim(line).empty()) continue;
    if (starts_with_keyword(line, "resolution")) {
      if (resolution) fail(K::MalformedHeader, lineno, 1, "duplicate resolution");
      const std::string_view value = trim(line.substr(10));
      double r = 0.0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), r);
      if (ec != std::errc{} || ptr != value.data() + value.size() || !(r > 0) || !std::isfinite(r)) {
        fail(K::MalformedHeader, lineno, 12, "resolution must be a positive number");
      }
      resolution = r;
    } else if (starts_with_keyword(line, "goals")) {
      std::size_t pos = 6;
      while (pos <= line.size()) {
        const auto comma = line.find(',', pos);
        const auto end = comma == std::string_view::npos ? line.size() : comma;
        const std::string_view entry = line.substr(pos, end - pos);
        const int column = static_cast<int>(pos) + 1;
        const auto eq = entry.rfind('=');
        if (eq == std::string_view::npos) fail(K::MalformedHeader, lineno, column, "expected <label>=<char>");
        const std::string_view label = trim(entry.substr(0, eq));
        const std::string_view symbol = trim(entry.substr(eq + 1));
        const int symbol_column = column + static_cast<int>(eq) + 1;
        if (label.empty()) fail(K::MalformedHeader, lineno, column, "empty goal label");
        if (symbol.size() != 1) fail(K::MalformedHeader, lineno, symbol_column, "goal symbol must be one character");
        const char ch = symbol.front();
        if (ch == '#') fail(K::GoalOnObstacle, lineno, symbol_column, "goal '" + std::string(label) + "' uses '#'");
        if (ch == '.' || ch == ' ') {
          fail(K::MalformedHeader, lineno, symbol_column, "goal symbol may not be '.' or blank");
        }
        for (const auto& d : declared) {
          if (d.symbol == ch) fail(K::MalformedHeader, lineno, symbol_column, "duplicate goal symbol");
          if (d.label == label) fail(K::MalformedHeader, lineno, column, "duplicate goal label");
        }
        declared.push_back({std::string(label), ch, lineno, column});
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
    } else {
      break;
    }
  }
  if (!resolution) fail(K::MalformedHeader, static_cast<int>(std::min(i, lines.size() - 1)) + 1, 1, "missing resolution");

  // Grid rows, with trailing blank lines allowed.
  std::size_t last = lines.size();
  while (last > i && trim(lines[last - 1]).empty()) --last;
  if (last == i) fail(K::EmptyGrid, static_cast<int>(i) + 1, 1, "no grid rows");

  const int width = static_cast<int>(lines[i].size());
  const int height = static_cast<int>(last - i);
  const GridShape shape{width, height, *resolution};
  std::vector<Terrain> cells(shape.size(), Terrain::Free);
  std::vector<GoalRegion> goals;
  for (const auto& d : declared) goals.push_back(GoalRegion{d.label, d.symbol, {}});

  for (int y = 0; y < height; ++y) {
    const std::string_view row = lines[i + static_cast<std::size_t>(y)];
    const int lineno = static_cast<int>(i) + y + 1;
    if (static_cast<int>(row.size()) != width) {
      fail(K::RaggedRows, lineno, std::min(static_cast<int>(row.size()), width) + 1,
           "expected " + std::to_string(width) + " columns, got " + std::to_string(row.size()));
    }
    for (int x = 0; x < width; ++x) {
      const char ch = row[static_cast<std::size_t>(x)];
      const Cell c{x, y};
      if (ch == '#') {
        cells[shape.index(c)] = Terrain::Obstacle;
      } else if (ch != '.') {
        auto it = std::find_if(goals.begin(), goals.end(), [ch](const GoalRegion& g) { return g.symbol == ch; });
        if (it == goals.end()) fail(K::UnknownSymbol, lineno, x + 1, std::string("'") + ch + "'");
        it->cells.insert(c);
      }
    }
  }
  if (std::none_of(cells.begin(), cells.end(), [](Terrain t) { return t == Terrain::Free; })) {
    fail(K::NoFreeCell, static_cast<int>(i) + 1, 1, "");
  }
  for (std::size_t g = 0; g < goals.size(); ++g) {
    if (goals[g].cells.empty()) fail(K::EmptyGoal, declared[g].line, declared[g].column, goals[g].label);
  }
  return SceneMap(std::move(id), shape, std::move(cells), std::move(goals));
}

SceneMap load_scene_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scene(ss.str(), path.stem().string());
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
  }
  return "stop";
}

// Spacing fov/n (the right edge itself is not sampled), so scans taken 30
// degrees apart share world bearings whenever 30 is a multiple of the
// spacing, as it is for the default 120 rays over 90 degrees.
double ray_bearing(int i, int n_rays, double fov) {
  if (n_rays <= 1) return 0.0;
  return fov / 2.0 - i * (fov / n_rays);
}

double DepthScan::bearing(int i) const { return ray_bearing(i, n_rays(), fov); }

DepthScan raycast_depth(const SceneMap& scene, const AgentPose& pose, int n_rays, double fov, double max_range) {
  if (n_rays < 1) throw ContractError("raycast needs at least one ray");
  if (!(fov > 0.0 && fov <= 360.0)) throw ContractError("fov must lie in (0, 360]");
  if (!(max_range > 0.0)) throw ContractError("max_range must be positive");

  DepthScan scan;
  scan.fov = fov;
  scan.max_range = max_range;
  scan.ranges.assign(static_cast<std::size_t>(n_rays), max_range);
  scan.hit.assign(static_cast<std::size_t>(n_rays), false);

  const Point2 origin = pose.position();
  for (int i = 0; i < n_rays; ++i) {
    const double dir = pose.heading + ray_bearing(i, n_rays, fov);
    const double dx = cos_deg(dir);
    const double dy = sin_deg(dir);
    traverse_ray(scene.shape(), origin, dx, dy, max_range, [&](const Cell& c, double t_enter) {
      if (scene.at(c) != Terrain::Obstacle) return true;
      if (t_enter <= max_range) {
        scan.ranges[static_cast<std::size_t>(i)] = std::max(t_enter, 1e-9);
        scan.hit[static_cast<std::size_t>(i)] = true;
      }
      return false;
    });
  }
  return scan;
}

StepOutcome step(const SceneMap& scene, const AgentPose& pose, Action action) {
  if (!scene.is_free_point(pose.position())) throw ContractError("pose is not in a free cell");
  switch (action) {
    case Action::TurnLeft:
      return {AgentPose{pose.x, pose.y, normalize_heading(pose.heading + kTurnStep)}, false};
    case Action::TurnRight:
      return {AgentPose{pose.x, pose.y, normalize_heading(pose.heading - kTurnStep)}, false};
    case Action::Stop:
      return {pose, false};
    case Action::Forward:
      break;
  }
  const double dx = kForwardStep * cos_deg(pose.heading);
  const double dy = kForwardStep * sin_deg(pose.heading);
  const int samples = static_cast<int>(std::ceil(kForwardStep / (scene.resolution() / 2.0)));
  for (int k = 1; k <= samples; ++k) {
    const double f = static_cast<double>(k) / samples;
    if (!scene.is_free_point({pose.x + f * dx, pose.y + f * dy})) return {pose, true};
  }
  return {AgentPose{pose.x + dx, pose.y + dy, pose.heading}, false};
}

double geodesic_distance(const SceneMap& scene, const AgentPose& from, const CellSet& targets) {
  if (targets.empty()) throw ContractError("geodesic_distance needs a nonempty target set");
  const Cell start = scene.shape().cell_of(from.position());
  if (!scene.is_free(start)) return kInfinity;
  if (targets.contains(start)) return 0.0;
  CellSet source;
  for (const Cell& c : targets) {
    if (scene.is_free(c)) source.insert(c);
  }
  if (source.empty()) return kInfinity;
  return fmm_solve(scene.free_mask(), source).at(start);
}

bool line_of_sight(const SceneMap& scene, const Point2& a, const Point2& b) {
  const double len = distance(a, b);
  if (!scene.is_free_point(a)) return false;
  if (len == 0.0) return true;
  const double dx = (b.x - a.x) / len;
  const double dy = (b.y - a.y) / len;
  bool clear = true;
  traverse_ray(scene.shape(), a, dx, dy, len, [&](const Cell& c, double) {
    if (scene.at(c) != Terrain::Free) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear && scene.is_free_point(b);
}

std::vector<std::string> visible_labels(const SceneMap& scene, const AgentPose& pose, const DepthScan& scan) {
  std::vector<bool> seen(scene.goal_regions().size(), false);
  for (int i = 0; i < scan.n_rays(); ++i) {
    const double dir = pose.heading + scan.bearing(i);
    const double range = scan.ranges[static_cast<std::size_t>(i)];
    traverse_ray(scene.shape(), pose.position(), cos_deg(dir), sin_deg(dir), range, [&](const Cell& c, double t) {
      if (t > range || scene.at(c) == Terrain::Obstacle) return false;
      const int g = scene.goal_index_at(c);
      if (g >= 0) seen[static_cast<std::size_t>(g)] = true;
      return true;
    });
  }
  std::vector<std::string> labels;
  for (std::size_t g = 0; g < seen.size(); ++g) {
    if (seen[g]) labels.push_back(scene.goal_regions()[g].label);
  }
  return labels;
}

double distance_to_cells(const GridShape& shape, const Point2& p, const CellSet& cells) {
  double best = kInfinity;
  for (const Cell& c : cells) best = std::min(best, distance(p, shape.center(c)));
  return best;
}

void validate_episode(const SceneMap& scene, const EpisodeSpec& spec) {
  if (scene.find_goal(spec.goal_label) == nullptr) {
    throw ContractError("goal label '" + spec.goal_label + "' not found in scene '" + scene.id() + "'");
  }
  if (!scene.is_free_point(spec.start.position())) throw ContractError("episode start is not in a free cell");
  if (!(spec.start.heading >= 0.0 && spec.start.heading < 360.0)) {
    throw ContractError("episode start heading must lie in [0, 360)");
  }
}

}  // namespace navvlm
