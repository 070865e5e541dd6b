#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navvlm/eikonal.hpp"
#include "navvlm/scene.hpp"

namespace navvlm {

enum class Guidance { Left, Right, Forward, Explore, NoInfo };
enum class PromptKind { TerminationCheck, DirectionQuery };
enum class TerminateVerdict { Stop, Continue };

std::string_view to_string(Guidance g);
std::string_view to_string(TerminateVerdict v);
std::string_view to_string(PromptKind k);
std::optional<Guidance> guidance_from_string(std::string_view s);
std::optional<TerminateVerdict> verdict_from_string(std::string_view s);

inline bool is_directional(Guidance g) {
  return g == Guidance::Left || g == Guidance::Right || g == Guidance::Forward;
}

/// Free-form language goal; nonempty after trimming.
class GoalSpec {
 public:
  explicit GoalSpec(std::string text);
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Structured stand-in for the camera image.
struct SceneSnapshot {
  std::vector<double> ranges;
  double fov = 90.0;
  std::vector<std::string> visible_labels;
};

/// Base64-encoded image bytes from a real rendering bridge.
struct EncodedImage {
  std::string base64;
};

using ObservationPayload = std::variant<EncodedImage, SceneSnapshot>;

struct OracleRequest {
  PromptKind prompt_kind = PromptKind::DirectionQuery;
  std::string goal;
  ObservationPayload observation = SceneSnapshot{};
  double fov = 90.0;
  int step = 0;
  // Simulator-side context for scripted oracles. Never sent over the wire.
  AgentPose pose;
};

struct OracleReply {
  std::string raw_text;
  std::optional<Guidance> guidance;
  std::optional<TerminateVerdict> verdict;
  double latency_ms = 0.0;
};

/// Keyword scan, case-insensitive, first match in priority order
/// left > right > straight|forward > explore; otherwise NoInfo.
Guidance parse_oracle_reply(std::string_view text);

/// "yes", "stop" or "reached" anywhere (case-insensitive) means Stop.
TerminateVerdict parse_termination_reply(std::string_view text);

/// The guidance role. Implementations answer the two prompt kinds.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual Guidance direction(const OracleRequest& request) = 0;
  virtual TerminateVerdict termination(const OracleRequest& request) = 0;
};

/// Requires request.prompt_kind == DirectionQuery. Exceptions thrown by the
/// oracle fold into NoInfo.
Guidance query_direction(Oracle& oracle, const OracleRequest& request);
/// Requires request.prompt_kind == TerminationCheck. Exceptions fold into Continue.
TerminateVerdict query_termination(Oracle& oracle, const OracleRequest& request);

struct GeodesicOracleConfig {
  double success_radius = 1.0;
  // Ground truth is inflated by this radius so advice respects the body.
  double agent_radius = 0.15;
};

/// Omniscient test oracle. Direction advice picks among turn-left+forward,
/// forward and turn-right+forward by ground-truth geodesic distance to the
/// goal; termination is Stop iff a goal cell is within the success radius
/// with clear line of sight.
class GeodesicOracle final : public Oracle {
 public:
  GeodesicOracle(const SceneMap& scene, const EpisodeSpec& spec, GeodesicOracleConfig config = {});

  Guidance direction(const OracleRequest& request) override;
  TerminateVerdict termination(const OracleRequest& request) override;

  /// Ground-truth geodesic distance from a position to the goal.
  [[nodiscard]] double distance_to_goal(const Point2& p) const;

 private:
  const SceneMap* scene_;
  const GoalRegion* goal_;
  GeodesicOracleConfig config_;
  DistanceField field_;
};

/// Stop iff a goal cell is within `radius` with clear line of sight.
bool goal_in_view(const SceneMap& scene, const GoalRegion& goal, const Point2& p, double radius);

/// Uniform over {Left, Right, Forward, Explore}; always Continue.
class RandomOracle final : public Oracle {
 public:
  explicit RandomOracle(std::uint64_t seed) : rng_(seed) {}
  Guidance direction(const OracleRequest&) override;
  TerminateVerdict termination(const OracleRequest&) override { return TerminateVerdict::Continue; }

 private:
  std::mt19937_64 rng_;
};

class AlwaysExploreOracle final : public Oracle {
 public:
  Guidance direction(const OracleRequest&) override { return Guidance::Explore; }
  TerminateVerdict termination(const OracleRequest&) override { return TerminateVerdict::Continue; }
};

/// Continue before step k, Stop from step k on. Direction is Explore.
class StopAtOracle final : public Oracle {
 public:
  explicit StopAtOracle(int k) : k_(k) {}
  Guidance direction(const OracleRequest&) override { return Guidance::Explore; }
  TerminateVerdict termination(const OracleRequest& request) override {
    return request.step >= k_ ? TerminateVerdict::Stop : TerminateVerdict::Continue;
  }

 private:
  int k_;
};

/// Frontier-only baseline: never gives direction, stops through the same
/// in-view goal detector the geodesic oracle uses.
class ExploreOnlyOracle final : public Oracle {
 public:
  ExploreOnlyOracle(const SceneMap& scene, const EpisodeSpec& spec, double success_radius = 1.0);
  Guidance direction(const OracleRequest&) override { return Guidance::Explore; }
  TerminateVerdict termination(const OracleRequest& request) override;

 private:
  const SceneMap* scene_;
  const GoalRegion* goal_;
  double success_radius_;
};

struct RemoteOracleConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::chrono::milliseconds timeout{10000};
};

/// Reads NAVVLM_REMOTE_TIMEOUT_MS, falling back to 10 s.
std::chrono::milliseconds remote_timeout_from_env();

/// Client for the HTTP wire protocol. Any transport or protocol failure
/// yields NoInfo / Continue. The reply's raw_text is re-parsed locally and
/// that parse is authoritative.
class RemoteOracle final : public Oracle {
 public:
  explicit RemoteOracle(RemoteOracleConfig config);

  Guidance direction(const OracleRequest& request) override;
  TerminateVerdict termination(const OracleRequest& request) override;

  /// Full reply of the last call; nullopt if it failed.
  [[nodiscard]] const std::optional<OracleReply>& last_reply() const { return last_reply_; }

 private:
  std::optional<OracleReply> post(const std::string& path, const OracleRequest& request);

  RemoteOracleConfig config_;
  std::optional<OracleReply> last_reply_;
};

/// Wire body for a request (nlohmann::json text, compact).
std::string to_wire_json(const OracleRequest& request);

/// Parses a 200 response body. Returns nullopt when the body is not a JSON
/// object with a string raw_text.
std::optional<OracleReply> parse_wire_reply(PromptKind kind, std::string_view body);

}  // namespace navvlm
