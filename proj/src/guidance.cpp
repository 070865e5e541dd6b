#include "navvlm/guidance.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include "navvlm/eikonal.hpp"
#include "navvlm/mapping.hpp"

namespace navvlm {

std::string_view to_string(Guidance g) {
  switch (g) {
    case Guidance::Left: return "left";
    case Guidance::Right: return "right";
    case Guidance::Forward: return "forward";
    case Guidance::Explore: return "explore";
    case Guidance::NoInfo: return "noinfo";
  }
  return "noinfo";
}

std::string_view to_string(TerminateVerdict v) { return v == TerminateVerdict::Stop ? "stop" : "continue"; }

std::string_view to_string(PromptKind k) { return k == PromptKind::DirectionQuery ? "direction" : "termination"; }

std::optional<Guidance> guidance_from_string(std::string_view s) {
  for (Guidance g : {Guidance::Left, Guidance::Right, Guidance::Forward, Guidance::Explore, Guidance::NoInfo}) {
    if (to_string(g) == s) return g;
  }
  return std::nullopt;
}

std::optional<TerminateVerdict> verdict_from_string(std::string_view s) {
  if (s == "stop") return TerminateVerdict::Stop;
  if (s == "continue") return TerminateVerdict::Continue;
  return std::nullopt;
}

GoalSpec::GoalSpec(std::string text) : text_(std::move(text)) {
  const auto first = text_.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ContractError("goal text must be nonempty");
  const auto last = text_.find_last_not_of(" \t\r\n");
  text_ = text_.substr(first, last - first + 1);
}

namespace {

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains(const std::string& haystack, std::string_view needle) { return haystack.find(needle) != std::string::npos; }

}  // namespace

Guidance parse_oracle_reply(std::string_view text) {
  const std::string t = lowercase(text);
  if (contains(t, "left")) return Guidance::Left;
  if (contains(t, "right")) return Guidance::Right;
  if (contains(t, "straight") || contains(t, "forward")) return Guidance::Forward;
  if (contains(t, "explore")) return Guidance::Explore;
  return Guidance::NoInfo;
}

TerminateVerdict parse_termination_reply(std::string_view text) {
  const std::string t = lowercase(text);
  for (std::string_view token : {"yes", "stop", "reached"}) {
    if (contains(t, token)) return TerminateVerdict::Stop;
  }
  return TerminateVerdict::Continue;
}

Guidance query_direction(Oracle& oracle, const OracleRequest& request) {
  if (request.prompt_kind != PromptKind::DirectionQuery) throw ContractError("query_direction needs a direction prompt");
  try {
    return oracle.direction(request);
  } catch (const std::exception& e) {
    std::clog << "navvlm: direction query failed: " << e.what() << "\n";
    return Guidance::NoInfo;
  }
}

TerminateVerdict query_termination(Oracle& oracle, const OracleRequest& request) {
  if (request.prompt_kind != PromptKind::TerminationCheck) {
    throw ContractError("query_termination needs a termination prompt");
  }
  try {
    return oracle.termination(request);
  } catch (const std::exception& e) {
    std::clog << "navvlm: termination query failed: " << e.what() << "\n";
    return TerminateVerdict::Continue;
  }
}

bool goal_in_view(const SceneMap& scene, const GoalRegion& goal, const Point2& p, double radius) {
  for (const Cell& c : goal.cells) {
    const Point2 center = scene.shape().center(c);
    if (distance(p, center) <= radius && line_of_sight(scene, p, center)) return true;
  }
  return false;
}

namespace {

const GoalRegion& resolve_goal(const SceneMap& scene, const EpisodeSpec& spec) {
  const GoalRegion* goal = scene.find_goal(spec.goal_label);
  if (goal == nullptr) throw ContractError("goal label '" + spec.goal_label + "' not found in scene");
  return *goal;
}

}  // namespace

GeodesicOracle::GeodesicOracle(const SceneMap& scene, const EpisodeSpec& spec, GeodesicOracleConfig config)
    : scene_(&scene), goal_(&resolve_goal(scene, spec)), config_(config) {
  OccupancyGrid truth(scene.shape());
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      truth.set({x, y}, scene.is_free({x, y}) ? Occupancy::Free : Occupancy::Obstacle);
    }
  }
  TraversabilityMask mask = dilate_obstacles(truth, config_.agent_radius);
  CellSet source;
  for (const Cell& c : goal_->cells) {
    if (mask.ok(c)) source.insert(c);
  }
  if (source.empty()) {
    // Goal tucked entirely inside the inflation band: plan on the raw grid.
    mask = scene.free_mask();
    source = goal_->cells;
  }
  field_ = fmm_solve(mask, source);
}

double GeodesicOracle::distance_to_goal(const Point2& p) const {
  // Bilinear blend of the four surrounding cell centers so sub-cell motion
  // registers; unreached corners drop out of the blend.
  const GridShape& shape = scene_->shape();
  const double gx = p.x / shape.resolution - 0.5;
  const double gy = p.y / shape.resolution - 0.5;
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const double fx = gx - x0;
  const double fy = gy - y0;
  double sum = 0.0;
  double weight = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const double t = field_.at({x0 + dx, y0 + dy});
      const double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      if (std::isfinite(t) && w > 0.0) {
        sum += w * t;
        weight += w;
      }
    }
  }
  if (weight > 0.0) return sum / weight;
  return field_.at(shape.cell_of(p));
}

Guidance GeodesicOracle::direction(const OracleRequest& request) {
  const double here = distance_to_goal(request.pose.position());
  struct Candidate {
    Guidance guidance;
    Action turn;
  };
  // Forward first: on a tie the agent keeps its heading.
  constexpr std::array<Candidate, 3> kCandidates{{{Guidance::Forward, Action::Stop},
                                                  {Guidance::Left, Action::TurnLeft},
                                                  {Guidance::Right, Action::TurnRight}}};
  Guidance best = Guidance::Explore;
  double best_distance = here;
  for (const Candidate& c : kCandidates) {
    const AgentPose turned = step(*scene_, request.pose, c.turn).pose;
    const StepOutcome moved = step(*scene_, turned, Action::Forward);
    if (moved.collision) continue;
    const double d = distance_to_goal(moved.pose.position());
    if (d < best_distance) {
      best_distance = d;
      best = c.guidance;
    }
  }
  return best;
}

TerminateVerdict GeodesicOracle::termination(const OracleRequest& request) {
  return goal_in_view(*scene_, *goal_, request.pose.position(), config_.success_radius) ? TerminateVerdict::Stop
                                                                                         : TerminateVerdict::Continue;
}

Guidance RandomOracle::direction(const OracleRequest&) {
  constexpr std::array<Guidance, 4> kChoices{Guidance::Left, Guidance::Right, Guidance::Forward, Guidance::Explore};
  return kChoices[static_cast<std::size_t>(rng_() % kChoices.size())];
}

ExploreOnlyOracle::ExploreOnlyOracle(const SceneMap& scene, const EpisodeSpec& spec, double success_radius)
    : scene_(&scene), goal_(&resolve_goal(scene, spec)), success_radius_(success_radius) {}

TerminateVerdict ExploreOnlyOracle::termination(const OracleRequest& request) {
  return goal_in_view(*scene_, *goal_, request.pose.position(), success_radius_) ? TerminateVerdict::Stop
                                                                                  : TerminateVerdict::Continue;
}

std::chrono::milliseconds remote_timeout_from_env() {
  if (const char* v = std::getenv("NAVVLM_REMOTE_TIMEOUT_MS")) {
    char* end = nullptr;
    const long ms = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && ms > 0) return std::chrono::milliseconds(ms);
  }
  return std::chrono::milliseconds(10000);
}

}  // namespace navvlm
