#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "navvlm/guidance.hpp"
#include "navvlm/mapping.hpp"
#include "navvlm/planner.hpp"
#include "navvlm/scene.hpp"

namespace navvlm {

struct EpisodeConfig {
  int max_steps = 500;
  double success_radius = 1.0;
  int oracle_cadence = 1;
  int replan_interval = 5;
  double stg_reach_threshold = 0.25;
  double dilation_radius = 0.15;
  SensorConfig sensor;
  GuidanceBand band;
  ActionPolicy policy;

  /// Throws ContractError unless every knob is positive.
  void validate() const;
};

enum class TerminationCause { VLMStop, ReachedGuided, ReachedFrontierExhausted, MaxSteps, PlannerStuck };

std::string_view to_string(TerminationCause c);
std::optional<TerminationCause> termination_cause_from_string(std::string_view s);

enum class StgKindTag { Guided, Frontier, None };

struct StepRecord {
  int t = 0;
  AgentPose pose;
  Action action = Action::Stop;
  std::optional<Guidance> guidance;  // nullopt when not queried this step
  StgKindTag stg_kind = StgKindTag::None;
  std::optional<TerminateVerdict> verdict;
  bool collision = false;
  // Directional guidance was projected and became this step's goal.
  bool guidance_projected = false;
};

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  double path_length = 0.0;
  double shortest_length = 0.0;
  TerminationCause cause = TerminationCause::MaxSteps;
  int collision_count = 0;
  AgentPose final_pose;
  std::vector<StepRecord> log;
};

struct EpisodeArtifacts {
  OccupancyGrid grid;
  std::optional<DistanceField> last_field;
};

/// Runs the observe / query / map / choose goal / plan / act loop until one
/// of the termination rules fires. Success is judged on ground truth at the
/// final pose. Throws ContractError only for invalid inputs.
EpisodeResult run_episode(const SceneMap& scene, const EpisodeSpec& spec, Oracle& oracle,
                          const EpisodeConfig& config = {}, EpisodeArtifacts* artifacts = nullptr);

/// Euclidean distance from the pose to the nearest stg cell center <= threshold.
bool check_reached(const AgentPose& pose, const GridShape& shape, const ShortTermGoal& stg, double threshold);

double compute_sr(std::span<const EpisodeResult> results);
/// Mean of S * l / max(p, l). Throws ContractError on an empty batch or a
/// successful episode with l == 0 < p, or non-finite l on success.
double compute_spl(std::span<const EpisodeResult> results);

/// JSONL step log: one object per step then {"result": {...}}.
std::string step_log_jsonl(const EpisodeResult& result);
/// Single-line JSON of the result fields (no log).
std::string result_json(const EpisodeResult& result);
/// Inverse of result_json; the log stays empty.
EpisodeResult result_from_json(std::string_view line);

std::vector<Point2> trajectory(const EpisodeResult& result);

}  // namespace navvlm
