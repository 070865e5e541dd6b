#include "navvlm/cli.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "navvlm/scene_gen.hpp"

namespace navvlm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Refuses to clobber existing artifacts unless --force was given.
void check_writable(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  for (const fs::path& p : paths) {
    if (fs::exists(p)) throw std::runtime_error(p.string() + " exists (use --force to overwrite)");
  }
}

struct Common {
  std::string oracle = "geodesic";
  std::string baseline;
  int max_steps = 500;
  double success_radius = 1.0;
  int cadence = 1;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;
  bool force = false;
};

EpisodeConfig episode_config(const Common& c) {
  EpisodeConfig config;
  config.max_steps = c.max_steps;
  config.success_radius = c.success_radius;
  config.oracle_cadence = c.cadence;
  try {
    config.validate();
  } catch (const ContractError& e) {
    throw std::invalid_argument(e.what());
  }
  return config;
}

double spl_term(const EpisodeResult& r) {
  if (!r.success) return 0.0;
  if (r.shortest_length == 0.0) return 1.0;
  return r.shortest_length / std::max(r.path_length, r.shortest_length);
}

std::string summary_text(const std::string& scene_id, const OracleSelector& oracle, const EpisodeResult& r) {
  std::string s;
  s += "scene: " + scene_id + "\n";
  s += "oracle: " + oracle.text + "\n";
  s += std::string("success: ") + (r.success ? "true" : "false") + "\n";
  s += "steps: " + std::to_string(r.steps) + "\n";
  s += "p: " + fixed(r.path_length) + "\n";
  s += "l: " + fixed(r.shortest_length) + "\n";
  s += "spl_term: " + fixed(spl_term(r)) + "\n";
  s += "cause: " + std::string(to_string(r.cause)) + "\n";
  s += "collisions: " + std::to_string(r.collision_count) + "\n";
  return s;
}

AgentPose parse_pose(const std::string& text) {
  AgentPose pose;
  char comma1 = 0;
  char comma2 = 0;
  std::istringstream in(text);
  if (!(in >> pose.x >> comma1 >> pose.y >> comma2 >> pose.heading) || comma1 != ',' || comma2 != ',') {
    throw std::invalid_argument("--start expects X,Y,HEADING, got '" + text + "'");
  }
  return pose;
}

// scene path -> loaded scene, shared read-only by the workers
using SceneCache = std::map<fs::path, SceneMap>;

const SceneMap& cached_scene(SceneCache& cache, const fs::path& path) {
  auto it = cache.find(path);
  if (it == cache.end()) it = cache.emplace(path, load_scene_file(path)).first;
  return it->second;
}

int cmd_run(const Common& c, const std::string& episodes, const std::string& scene_flag, int index,
            const std::string& start_flag, const std::string& goal_flag, const std::string& goal_text) {
  const OracleSelector selector = parse_oracle_selector(c.oracle);
  const EpisodeConfig config = episode_config(c);
  if (c.out.empty()) throw std::invalid_argument("--out is required");

  EpisodeEntry entry;
  if (!episodes.empty()) {
    const std::vector<EpisodeEntry> all = load_episodes(episodes);
    if (index < 0 || index >= static_cast<int>(all.size())) {
      throw std::invalid_argument("--index " + std::to_string(index) + " out of range for " + episodes);
    }
    entry = all[static_cast<std::size_t>(index)];
    if (!scene_flag.empty()) entry.scene_path = scene_flag;
  } else {
    if (scene_flag.empty() || start_flag.empty() || goal_flag.empty()) {
      throw std::invalid_argument("run needs --episodes, or --scene with --start and --goal");
    }
    entry.scene_path = scene_flag;
    entry.scene_ref = scene_flag;
    entry.spec.start = parse_pose(start_flag);
    entry.spec.goal_label = goal_flag;
    entry.spec.goal_text = goal_text.empty() ? goal_flag : goal_text;
    entry.spec.seed = c.seed;
  }
  const SceneMap scene = load_scene_file(entry.scene_path);
  entry.spec.scene_id = scene.id();
  validate_episode(scene, entry.spec);

  const fs::path out(c.out);
  const std::vector<fs::path> artifacts{out / "steps.jsonl", out / "map.pgm", out / "map.txt", out / "field.pgm",
                                        out / "summary.txt"};
  check_writable(artifacts, c.force);
  fs::create_directories(out);

  std::unique_ptr<Oracle> oracle = make_oracle(selector, scene, entry.spec, config, c.seed);
  EpisodeArtifacts art{OccupancyGrid(scene.shape()), std::nullopt};
  const EpisodeResult result = run_episode(scene, entry.spec, *oracle, config, &art);

  write_file_atomic(artifacts[0], step_log_jsonl(result));
  write_file_atomic(artifacts[1], to_pgm(art.grid));
  write_file_atomic(artifacts[2], map_sidecar(art.grid, trajectory(result)));
  if (art.last_field) write_file_atomic(artifacts[3], to_pgm(*art.last_field));
  const std::string summary = summary_text(scene.id(), selector, result);
  write_file_atomic(artifacts[4], summary);
  std::cout << summary;
  return kOk;
}

struct BatchOutcome {
  std::vector<std::string> lines;  // result JSONL, in episode order
};

BatchOutcome run_batch(const std::vector<EpisodeEntry>& entries, const SceneCache& scenes,
                       const OracleSelector& selector, const EpisodeConfig& config, std::uint64_t seed, int workers,
                       const fs::path& log_dir) {
  const std::size_t n = entries.size();
  BatchOutcome outcome;
  outcome.lines.resize(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const EpisodeEntry& e = entries[i];
      try {
        const SceneMap& scene = scenes.at(e.scene_path);
        std::unique_ptr<Oracle> oracle = make_oracle(selector, scene, e.spec, config, seed);
        const EpisodeResult r = run_episode(scene, e.spec, *oracle, config);
        char name[32];
        std::snprintf(name, sizeof name, "episode_%04zu.jsonl", i);
        write_file_atomic(log_dir / name, step_log_jsonl(r));
        json line = json::parse(result_json(r));
        line["episode"] = i;
        line["scene"] = e.scene_ref;
        outcome.lines[i] = line.dump();
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int k = 1; k < count; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw std::runtime_error("episode " + std::to_string(i) + ": " + errors[i]);
  }
  return outcome;
}

// Aggregates come from the file as written, so they match a recomputation.
json aggregate_from_file(const fs::path& path, const std::string& oracle) {
  std::vector<EpisodeResult> results;
  std::istringstream in(read_text(path));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) results.push_back(result_from_json(line));
  }
  return json{{"sr", compute_sr(results)}, {"spl", compute_spl(results)}, {"n", results.size()}, {"oracle", oracle}};
}

int cmd_eval(const Common& c, const std::string& episodes) {
  if (episodes.empty()) throw std::invalid_argument("eval needs --episodes");
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  const OracleSelector selector = parse_oracle_selector(c.oracle);
  std::optional<OracleSelector> baseline;
  if (!c.baseline.empty()) baseline = parse_oracle_selector(c.baseline);
  const EpisodeConfig config = episode_config(c);

  // Everything is parsed and validated before the first episode starts.
  const std::vector<EpisodeEntry> entries = load_episodes(episodes);
  if (entries.empty()) throw std::invalid_argument(episodes + " has no episodes");
  SceneCache scenes;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      const SceneMap& scene = cached_scene(scenes, entries[i].scene_path);
      EpisodeSpec spec = entries[i].spec;
      spec.scene_id = scene.id();
      validate_episode(scene, spec);
    } catch (const std::exception& ex) {
      throw std::runtime_error(episodes + " episode " + std::to_string(i) + ": " + ex.what());
    }
  }

  const fs::path out(c.out);
  std::vector<fs::path> artifacts{out / "results.jsonl", out / "metrics.json"};
  if (baseline) artifacts.push_back(out / "baseline_results.jsonl");
  check_writable(artifacts, c.force);
  fs::create_directories(out / "logs" / "oracle");
  if (baseline) fs::create_directories(out / "logs" / "baseline");

  const int workers = c.workers > 0 ? c.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto write_lines = [](const fs::path& path, const std::vector<std::string>& lines) {
    std::string text;
    for (const std::string& l : lines) text += l + "\n";
    write_file_atomic(path, text);
  };

  const BatchOutcome main_run = run_batch(entries, scenes, selector, config, c.seed, workers, out / "logs" / "oracle");
  write_lines(artifacts[0], main_run.lines);
  json metrics = aggregate_from_file(artifacts[0], selector.text);
  if (baseline) {
    const BatchOutcome base_run =
        run_batch(entries, scenes, *baseline, config, c.seed, workers, out / "logs" / "baseline");
    write_lines(artifacts[2], base_run.lines);
    metrics["baseline"] = aggregate_from_file(artifacts[2], baseline->text);
  }
  write_file_atomic(artifacts[1], metrics.dump(2) + "\n");

  auto row = [](const json& m) {
    std::printf("%-24s n=%-4d sr=%.4f spl=%.4f\n", m.at("oracle").get<std::string>().c_str(), m.at("n").get<int>(),
                m.at("sr").get<double>(), m.at("spl").get<double>());
  };
  row(metrics);
  if (baseline) row(metrics.at("baseline"));
  return kOk;
}

int cmd_gen_scenes(const Common& c, int count, const SceneGenConfig& gen) {
  if (c.out.empty()) throw std::invalid_argument("--out is required");
  if (count < 1) throw std::invalid_argument("--count must be at least 1");
  const fs::path out(c.out);
  std::vector<fs::path> artifacts{out / "episodes.jsonl"};
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scene_%04d.scene", i);
    names.emplace_back(name);
    artifacts.push_back(out / name);
  }
  check_writable(artifacts, c.force);
  fs::create_directories(out);

  std::string episodes;
  for (int i = 0; i < count; ++i) {
    const GeneratedEpisode g = generate_scene(gen, c.seed, i);
    write_file_atomic(out / names[static_cast<std::size_t>(i)], g.scene.to_text());
    episodes += episode_line(names[static_cast<std::size_t>(i)], g.episode) + "\n";
  }
  write_file_atomic(artifacts[0], episodes);
  std::printf("wrote %d scenes to %s\n", count, out.string().c_str());
  return kOk;
}

void add_common(CLI::App& app, Common& c, bool with_oracle) {
  if (with_oracle) {
    app.add_option("--oracle", c.oracle, "geodesic|random|explore-only|stop-at:K|remote:URL");
    app.add_option("--max-steps", c.max_steps, "Episode step budget T");
    app.add_option("--success-radius", c.success_radius, "Success radius in meters");
    app.add_option("--cadence", c.cadence, "Query the oracle every N steps");
  }
  app.add_option("--seed", c.seed, "Run seed");
  app.add_option("--out", c.out, "Output directory")->required();
  app.add_flag("--force", c.force, "Overwrite existing artifacts");
}

}  // namespace

OracleSelector parse_oracle_selector(std::string_view text) {
  OracleSelector s;
  s.text = std::string(text);
  if (text == "geodesic") {
    s.kind = OracleSelector::Kind::Geodesic;
  } else if (text == "random") {
    s.kind = OracleSelector::Kind::Random;
  } else if (text == "explore-only") {
    s.kind = OracleSelector::Kind::ExploreOnly;
  } else if (text.starts_with("stop-at:")) {
    const std::string_view k = text.substr(8);
    int value = -1;
    const auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), value);
    if (k.empty() || ec != std::errc{} || ptr != k.data() + k.size() || value < 0) {
      throw std::invalid_argument("bad oracle selector '" + s.text + "': K must be a non-negative integer");
    }
    s.kind = OracleSelector::Kind::StopAt;
    s.stop_at = value;
  } else if (text.starts_with("remote:")) {
    s.url = std::string(text.substr(7));
    if (s.url.empty()) throw std::invalid_argument("bad oracle selector '" + s.text + "': missing URL");
    s.kind = OracleSelector::Kind::Remote;
  } else {
    throw std::invalid_argument("unknown oracle selector '" + s.text + "'");
  }
  return s;
}

std::unique_ptr<Oracle> make_oracle(const OracleSelector& selector, const SceneMap& scene, const EpisodeSpec& spec,
                                    const EpisodeConfig& config, std::uint64_t seed) {
  switch (selector.kind) {
    case OracleSelector::Kind::Geodesic:
      return std::make_unique<GeodesicOracle>(scene, spec,
                                              GeodesicOracleConfig{config.success_radius, config.dilation_radius});
    case OracleSelector::Kind::Random:
      return std::make_unique<RandomOracle>(splitmix(seed ^ splitmix(spec.seed)));
    case OracleSelector::Kind::ExploreOnly:
      return std::make_unique<ExploreOnlyOracle>(scene, spec, config.success_radius);
    case OracleSelector::Kind::StopAt:
      return std::make_unique<StopAtOracle>(selector.stop_at);
    case OracleSelector::Kind::Remote:
      return std::make_unique<RemoteOracle>(RemoteOracleConfig{selector.url, remote_timeout_from_env()});
  }
  throw ContractError("unhandled oracle selector");
}

std::vector<EpisodeEntry> load_episodes(const fs::path& path) {
  std::istringstream in(read_text(path));
  const fs::path base = path.parent_path();
  std::vector<EpisodeEntry> entries;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      EpisodeEntry e;
      e.scene_ref = j.at("scene").get<std::string>();
      const fs::path ref(e.scene_ref);
      e.scene_path = ref.is_absolute() ? ref : base / ref;
      const json& start = j.at("start");
      e.spec.start = {start.at("x").get<double>(), start.at("y").get<double>(), start.at("heading").get<double>()};
      e.spec.goal_label = j.at("goal_label").get<std::string>();
      e.spec.goal_text = j.value("goal_text", e.spec.goal_label);
      e.spec.seed = j.value("seed", std::uint64_t{0});
      e.spec.scene_id = e.scene_path.stem().string();
      if (!fs::exists(e.scene_path)) throw std::runtime_error("scene file " + e.scene_path.string() + " not found");
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw std::runtime_error(where + "malformed episode: " + ex.what());
    } catch (const std::runtime_error& ex) {
      throw std::runtime_error(where + ex.what());
    }
  }
  return entries;
}

std::string episode_line(const std::string& scene_ref, const EpisodeSpec& spec) {
  return json{{"scene", scene_ref},
              {"start", {{"x", spec.start.x}, {"y", spec.start.y}, {"heading", spec.start.heading}}},
              {"goal_text", spec.goal_text},
              {"goal_label", spec.goal_label},
              {"seed", spec.seed}}
      .dump();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

int main(const std::vector<std::string>& args) {
  CLI::App app{"Navigation with language-model guidance over occupancy grids", "navvlm"};
  app.require_subcommand(1);

  Common common;
  std::string episodes;
  std::string scene;
  std::string start;
  std::string goal;
  std::string goal_text;
  int index = 0;
  int count = 50;
  SceneGenConfig gen;

  CLI::App* run = app.add_subcommand("run", "Run one episode and export its artifacts");
  add_common(*run, common, true);
  run->add_option("--episodes", episodes, "Episodes JSONL");
  run->add_option("--scene", scene, "Scene file");
  run->add_option("--index", index, "Which episode of --episodes to run");
  run->add_option("--start", start, "X,Y,HEADING when running a bare --scene");
  run->add_option("--goal", goal, "Goal label when running a bare --scene");
  run->add_option("--goal-text", goal_text, "Goal description (defaults to the label)");

  CLI::App* eval = app.add_subcommand("eval", "Run a batch of episodes and report SR/SPL");
  add_common(*eval, common, true);
  eval->add_option("--episodes", episodes, "Episodes JSONL")->required();
  eval->add_option("--baseline", common.baseline, "Second oracle selector to compare against");
  eval->add_option("--workers", common.workers, "Parallel workers (default: hardware threads)");

  CLI::App* gen_cmd = app.add_subcommand("gen-scenes", "Generate seeded scenes and an episodes file");
  add_common(*gen_cmd, common, false);
  gen_cmd->add_option("--count", count, "Number of scenes");
  gen_cmd->add_option("--size", gen.size, "Cells per side");
  gen_cmd->add_option("--density", gen.obstacle_density, "Obstacle density in [0, 0.4]");
  gen_cmd->add_option("--resolution", gen.resolution, "Meters per cell");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(common, episodes, scene, index, start, goal, goal_text);
    if (eval->parsed()) return cmd_eval(common, episodes);
    return cmd_gen_scenes(common, count, gen);
  } catch (const std::invalid_argument& e) {
    std::cerr << "navvlm: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "navvlm: " << e.what() << "\n";
    return kFailure;
  }
}

int main(int argc, char** argv) { return main(std::vector<std::string>(argv, argv + argc)); }

}  // namespace navvlm::cli
