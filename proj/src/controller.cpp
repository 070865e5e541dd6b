#include "navvlm/controller.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace navvlm {

using nlohmann::json;

void EpisodeConfig::validate() const {
  if (max_steps <= 0 || success_radius <= 0 || oracle_cadence <= 0 || replan_interval <= 0 ||
      stg_reach_threshold <= 0) {
    throw ContractError("episode config values must all be positive");
  }
  if (dilation_radius < 0) throw ContractError("dilation radius must be nonnegative");
  if (sensor.n_rays < 1 || !(sensor.fov > 0 && sensor.fov <= 360) || !(sensor.max_range > 0)) {
    throw ContractError("invalid sensor config");
  }
}

std::string_view to_string(TerminationCause c) {
  switch (c) {
    case TerminationCause::VLMStop: return "VLMStop";
    case TerminationCause::ReachedGuided: return "ReachedGuided";
    case TerminationCause::ReachedFrontierExhausted: return "ReachedFrontierExhausted";
    case TerminationCause::MaxSteps: return "MaxSteps";
    case TerminationCause::PlannerStuck: return "PlannerStuck";
  }
  return "MaxSteps";
}

std::optional<TerminationCause> termination_cause_from_string(std::string_view s) {
  for (auto c : {TerminationCause::VLMStop, TerminationCause::ReachedGuided, TerminationCause::ReachedFrontierExhausted,
                 TerminationCause::MaxSteps, TerminationCause::PlannerStuck}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

bool check_reached(const AgentPose& pose, const GridShape& shape, const ShortTermGoal& stg, double threshold) {
  if (stg.cells.empty()) throw ContractError("check_reached needs a nonempty goal");
  return distance_to_cells(shape, pose.position(), stg.cells) <= threshold;
}

namespace {

// Dilated map with the agent's own footprint forced open, so the agent can
// always plan out of a spot it was allowed to reach.
TraversabilityMask planning_mask(const OccupancyGrid& grid, const AgentPose& pose, double radius) {
  TraversabilityMask mask = dilate_obstacles(grid, radius);
  const GridShape& shape = grid.shape();
  const Cell agent = shape.cell_of(pose.position());
  const int reach = static_cast<int>(std::ceil(radius / shape.resolution));
  for (int dy = -reach; dy <= reach; ++dy) {
    for (int dx = -reach; dx <= reach; ++dx) {
      const Cell c{agent.x + dx, agent.y + dy};
      if (!shape.contains(c) || grid.at(c) == Occupancy::Obstacle) continue;
      if (distance(pose.position(), shape.center(c)) <= radius || c == agent) mask.set(c, true);
    }
  }
  return mask;
}

CellSet traversable_part(const CellSet& cells, const TraversabilityMask& mask) {
  CellSet out;
  for (const Cell& c : cells) {
    if (mask.ok(c)) out.insert(c);
  }
  return out;
}

class Planner {
 public:
  Planner(const GridShape& shape, int replan_interval) : shape_(shape), replan_interval_(replan_interval) {}

  std::optional<PathPlan> plan(const TraversabilityMask& mask, const CellSet& sources, const AgentPose& pose, int t,
                               bool force) {
    if (sources.empty()) return std::nullopt;
    if (force || !field_ || sources != field_->source || t - field_step_ >= replan_interval_) {
      field_ = fmm_solve(mask, sources);
      field_step_ = t;
    }
    const Cell agent = shape_.cell_of(pose.position());
    if (!std::isfinite(field_->at(agent))) {
      // A stale field may not cover the agent yet; retry on the current mask once.
      if (field_step_ == t) return std::nullopt;
      field_ = fmm_solve(mask, sources);
      field_step_ = t;
      if (!std::isfinite(field_->at(agent))) return std::nullopt;
    }
    return extract_path(*field_, agent);
  }

  void reset() { field_.reset(); }
  [[nodiscard]] const std::optional<DistanceField>& field() const { return field_; }

 private:
  GridShape shape_;
  int replan_interval_;
  std::optional<DistanceField> field_;
  int field_step_ = -1;
};

}  // namespace

EpisodeResult run_episode(const SceneMap& scene, const EpisodeSpec& spec, Oracle& oracle, const EpisodeConfig& config,
                          EpisodeArtifacts* artifacts) {
  config.validate();
  validate_episode(scene, spec);
  const GoalRegion& goal = *scene.find_goal(spec.goal_label);
  const GridShape& shape = scene.shape();

  EpisodeResult result;
  result.shortest_length = geodesic_distance(scene, spec.start, goal.cells);

  OccupancyGrid grid(shape);
  Planner planner(shape, config.replan_interval);
  AgentPose pose = spec.start;
  std::optional<ShortTermGoal> stg;
  CellSet visited_frontiers;
  bool force_replan = false;
  int plan_failures = 0;
  int spin_turns = 0;
  const int kFullTurn = static_cast<int>(std::lround(360.0 / kTurnStep));

  for (int t = 0;; ++t) {
    StepRecord rec;
    rec.t = t;
    rec.pose = pose;
    auto finish = [&](TerminationCause cause) {
      rec.action = Action::Stop;
      result.log.push_back(rec);
      result.cause = cause;
      result.steps = t;
    };

    const DepthScan scan = raycast_depth(scene, pose, config.sensor);
    const bool cadence = t % config.oracle_cadence == 0;
    OracleRequest request;
    request.goal = spec.goal_text;
    request.observation = SceneSnapshot{scan.ranges, scan.fov, visible_labels(scene, pose, scan)};
    request.fov = scan.fov;
    request.step = t;
    request.pose = pose;

    if (cadence) {
      request.prompt_kind = PromptKind::TerminationCheck;
      rec.verdict = query_termination(oracle, request);
      if (*rec.verdict == TerminateVerdict::Stop) {
        finish(TerminationCause::VLMStop);
        break;
      }
    }
    if (t >= config.max_steps) {
      finish(TerminationCause::MaxSteps);
      break;
    }

    integrate_scan(grid, pose, scan);
    const TraversabilityMask mask = planning_mask(grid, pose, config.dilation_radius);

    if (cadence) {
      request.prompt_kind = PromptKind::DirectionQuery;
      rec.guidance = query_direction(oracle, request);
    }

    // Fresh directional guidance wins over retained and frontier goals. A
    // projection the planner cannot reach counts as a failed projection.
    std::optional<PathPlan> plan;
    if (rec.guidance && is_directional(*rec.guidance)) {
      const ImageRegion region = render_guidance_region(*rec.guidance, scan.fov, config.band);
      if (auto projected = project_guidance(grid, pose, scan, region, t)) {
        if (check_reached(pose, shape, *projected, config.stg_reach_threshold)) {
          rec.stg_kind = StgKindTag::Guided;
          rec.guidance_projected = true;
          finish(TerminationCause::ReachedGuided);
          break;
        }
        plan = planner.plan(mask, traversable_part(projected->cells, mask), pose, t, force_replan);
        if (plan) {
          stg = std::move(*projected);
          rec.guidance_projected = true;
          spin_turns = 0;
        }
      }
    }
    if (!plan && stg && stg->kind == GoalKind::Guided) {
      if (check_reached(pose, shape, *stg, config.stg_reach_threshold)) {
        // Between queries the last guidance stands, so arriving ends the
        // episode. Once the oracle has since asked to explore (or its advice
        // could not be projected) the old area is released to exploration.
        if (!rec.guidance) {
          rec.stg_kind = StgKindTag::Guided;
          finish(TerminationCause::ReachedGuided);
          break;
        }
        stg.reset();
      } else {
        plan = planner.plan(mask, traversable_part(stg->cells, mask), pose, t, force_replan);
        if (!plan) stg.reset();
      }
    }

    if (!plan) {
      CellSet frontiers = frontier_cells(grid);
      for (const Cell& c : visited_frontiers) frontiers.erase(c);
      ShortTermGoal selected = select_frontier(grid, mask, pose, frontiers, t);
      while (!selected.degenerate && check_reached(pose, shape, selected, config.stg_reach_threshold)) {
        // Arrived: retire this frontier and everything around the agent, pick again.
        const double retire = config.stg_reach_threshold + shape.resolution * 1.5;
        visited_frontiers.insert(*selected.anchor);
        frontiers.erase(*selected.anchor);
        for (auto it = frontiers.begin(); it != frontiers.end();) {
          if (distance(pose.position(), shape.center(*it)) <= retire) {
            visited_frontiers.insert(*it);
            it = frontiers.erase(it);
          } else {
            ++it;
          }
        }
        selected = select_frontier(grid, mask, pose, frontiers, t);
      }
      if (selected.degenerate) {
        // Nothing left in view; a full turn in place may still uncover space
        // the wedge never covered before giving up.
        if (spin_turns >= kFullTurn) {
          finish(TerminationCause::ReachedFrontierExhausted);
          break;
        }
        ++spin_turns;
        stg.reset();
      } else {
        spin_turns = 0;
        stg = std::move(selected);
        plan = planner.plan(mask, traversable_part(stg->cells, mask), pose, t, force_replan);
      }
    }
    if (stg) rec.stg_kind = stg->kind == GoalKind::Guided ? StgKindTag::Guided : StgKindTag::Frontier;

    if (!stg) {
      rec.action = Action::TurnLeft;
    } else if (!plan) {
      if (++plan_failures >= 2) {
        finish(TerminationCause::PlannerStuck);
        break;
      }
      stg.reset();
      planner.reset();
      rec.action = Action::TurnLeft;
    } else {
      plan_failures = 0;
      rec.action = next_action(pose, shape, *plan, config.policy);
    }

    const StepOutcome outcome = step(scene, pose, rec.action);
    rec.collision = outcome.collision;
    force_replan = outcome.collision;
    if (outcome.collision) ++result.collision_count;
    if (rec.action == Action::Forward && !outcome.collision) result.path_length += kForwardStep;
    pose = outcome.pose;
    result.log.push_back(rec);
  }

  result.final_pose = pose;
  result.success = distance_to_cells(shape, pose.position(), goal.cells) <= config.success_radius;
  if (artifacts != nullptr) {
    artifacts->grid = std::move(grid);
    artifacts->last_field = planner.field();
  }
  return result;
}

double compute_sr(std::span<const EpisodeResult> results) {
  if (results.empty()) throw ContractError("compute_sr needs at least one episode");
  const auto successes = std::count_if(results.begin(), results.end(), [](const EpisodeResult& r) { return r.success; });
  return static_cast<double>(successes) / static_cast<double>(results.size());
}

double compute_spl(std::span<const EpisodeResult> results) {
  if (results.empty()) throw ContractError("compute_spl needs at least one episode");
  double sum = 0.0;
  for (const EpisodeResult& r : results) {
    if (!r.success) continue;
    const double l = r.shortest_length;
    const double p = r.path_length;
    if (!std::isfinite(l)) throw ContractError("successful episode with infinite shortest length");
    if (l == 0.0) {
      if (p > 0.0) throw ContractError("degenerate episode: success with l = 0 and p > 0");
      sum += 1.0;
      continue;
    }
    sum += l / std::max(p, l);
  }
  return sum / static_cast<double>(results.size());
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json result_object(const EpisodeResult& r) {
  return json{{"success", r.success},
              {"steps", r.steps},
              {"path_length", r.path_length},
              {"shortest_length", number_or_null(r.shortest_length)},
              {"termination_cause", std::string(to_string(r.cause))},
              {"collision_count", r.collision_count},
              {"final_pose", {{"x", r.final_pose.x}, {"y", r.final_pose.y}, {"heading", r.final_pose.heading}}}};
}

std::string_view stg_kind_text(StgKindTag k) {
  switch (k) {
    case StgKindTag::Guided: return "guided";
    case StgKindTag::Frontier: return "frontier";
    case StgKindTag::None: return "none";
  }
  return "none";
}

}  // namespace

std::string step_log_jsonl(const EpisodeResult& result) {
  std::string out;
  for (const StepRecord& s : result.log) {
    const json line{{"t", s.t},
                    {"x", s.pose.x},
                    {"y", s.pose.y},
                    {"heading", s.pose.heading},
                    {"action", std::string(to_string(s.action))},
                    {"guidance", s.guidance ? std::string(to_string(*s.guidance)) : "none"},
                    {"stg_kind", std::string(stg_kind_text(s.stg_kind))},
                    {"verdict", s.verdict ? std::string(to_string(*s.verdict)) : "none"},
                    {"collision", s.collision}};
    out += line.dump();
    out += '\n';
  }
  out += json{{"result", result_object(result)}}.dump();
  out += '\n';
  return out;
}

std::string result_json(const EpisodeResult& result) { return result_object(result).dump(); }

EpisodeResult result_from_json(std::string_view line) {
  const json j = json::parse(line);
  const json& r = j.contains("result") ? j.at("result") : j;
  EpisodeResult out;
  out.success = r.at("success").get<bool>();
  out.steps = r.at("steps").get<int>();
  out.path_length = r.at("path_length").get<double>();
  out.shortest_length = r.at("shortest_length").is_null() ? kInfinity : r.at("shortest_length").get<double>();
  const auto cause = termination_cause_from_string(r.at("termination_cause").get<std::string>());
  if (!cause) throw std::runtime_error("unknown termination cause in result line");
  out.cause = *cause;
  out.collision_count = r.at("collision_count").get<int>();
  if (r.contains("final_pose")) {
    const json& p = r.at("final_pose");
    out.final_pose = {p.at("x").get<double>(), p.at("y").get<double>(), p.at("heading").get<double>()};
  }
  return out;
}

std::vector<Point2> trajectory(const EpisodeResult& result) {
  std::vector<Point2> out;
  out.reserve(result.log.size() + 1);
  for (const StepRecord& s : result.log) out.push_back(s.pose.position());
  if (result.log.empty() || !(result.log.back().pose == result.final_pose)) out.push_back(result.final_pose.position());
  return out;
}

}  // namespace navvlm
