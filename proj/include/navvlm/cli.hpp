#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "navvlm/controller.hpp"
#include "navvlm/guidance.hpp"
#include "navvlm/scene.hpp"

namespace navvlm::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

struct OracleSelector {
  enum class Kind { Geodesic, Random, ExploreOnly, StopAt, Remote };
  Kind kind = Kind::Geodesic;
  int stop_at = 0;
  std::string url;
  std::string text;  // as given on the command line
};

/// geodesic | random | explore-only | stop-at:K | remote:URL.
/// Throws std::invalid_argument naming the bad selector.
OracleSelector parse_oracle_selector(std::string_view text);

/// One oracle per episode. `seed` is the run seed; the random oracle mixes it
/// with the episode seed so batches stay reproducible in any worker order.
std::unique_ptr<Oracle> make_oracle(const OracleSelector& selector, const SceneMap& scene, const EpisodeSpec& spec,
                                    const EpisodeConfig& config, std::uint64_t seed);

struct EpisodeEntry {
  std::filesystem::path scene_path;  // resolved against the episodes file
  std::string scene_ref;             // as written in the file
  EpisodeSpec spec;
};

/// JSONL, one object per line:
///   {"scene": path, "start": {"x","y","heading"}, "goal_text", "goal_label", "seed"}
/// Blank lines are skipped. Throws std::runtime_error with the line number on
/// any malformed line or missing scene file.
std::vector<EpisodeEntry> load_episodes(const std::filesystem::path& path);
std::string episode_line(const std::string& scene_ref, const EpisodeSpec& spec);

/// Writes through a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Entry point shared by the navvlm binary and the tests.
int main(int argc, char** argv);
int main(const std::vector<std::string>& args);

}  // namespace navvlm::cli
