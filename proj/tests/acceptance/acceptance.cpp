// One line per acceptance criterion. Exit status is nonzero if any line fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../common/dijkstra8.hpp"
#include "../common/wire_stub.hpp"
#include "navvlm/cli.hpp"
#include "navvlm/controller.hpp"
#include "navvlm/eikonal.hpp"
#include "navvlm/guidance.hpp"
#include "navvlm/scene.hpp"

namespace fs = std::filesystem;
using namespace navvlm;

namespace {

struct Verdict {
  bool ok = false;
  std::string detail;
};

int failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const std::string& name, const std::function<Verdict()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  if (!v.ok) ++failures;
  std::printf("%s  %s: %s (%.1f s)\n", v.ok ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int cli_call(std::vector<std::string> args) {
  args.insert(args.begin(), "navvlm");
  // The CLI prints tables and summaries; keep the report readable.
  std::cout.flush();
  std::fflush(stdout);
  const int saved = dup(1);
  std::FILE* null = std::fopen("/dev/null", "w");
  dup2(fileno(null), 1);
  const int rc = cli::main(args);
  std::cout.flush();
  std::fflush(stdout);
  dup2(saved, 1);
  close(saved);
  std::fclose(null);
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict fmm_accuracy() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridShape shape{128, 128, 1.0};
  const Cell src{64, 64};
  const DistanceField f = fmm_solve(TraversabilityMask(shape, true), {src});
  double worst = 0.0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const Cell c = shape.cell_at(i);
    if (c == src) continue;
    const double e = std::hypot(c.x - src.x, c.y - src.y);
    worst = std::max(worst, std::abs(f.T[i] - e) / e);
  }
  const GridShape line{200, 1, 0.05};
  const DistanceField g = fmm_solve(TraversabilityMask(line, true), {{0, 0}});
  double corridor = 0.0;
  for (int x = 0; x < line.width; ++x) corridor = std::max(corridor, std::abs(g.at({x, 0}) - x * 0.05));
  const double t = seconds_since(t0);
  return {worst <= 0.10 && corridor <= 1e-12 && t < 1.0,
          "max rel err " + fmt("%.4f", worst) + ", corridor err " + fmt("%.1e", corridor) + ", " + fmt("%.3f", t) +
              " s"};
}

Verdict fmm_vs_dijkstra() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridShape shape{64, 64, 1.0};
  double worst = 0.0;
  double mean = 0.0;
  std::size_t n = 0;
  std::size_t over = 0;
  bool same_reach = true;
  for (int seed = 1; seed <= 30; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::bernoulli_distribution blocked(0.2);
    TraversabilityMask mask(shape, true);
    for (auto& t : mask.traversable) t = blocked(rng) ? 0 : 1;
    const Cell src{32, 32};
    mask.set(src, true);
    const DistanceField f = fmm_solve(mask, {src});
    const std::vector<double> d = testing_d8::dijkstra8(mask, src);
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (std::isfinite(d[i]) != std::isfinite(f.T[i])) same_reach = false;
      if (!std::isfinite(d[i]) || d[i] == 0.0) continue;
      const double r = std::abs(f.T[i] - d[i]) / d[i];
      worst = std::max(worst, r);
      mean += r;
      ++n;
      if (r > 0.08) ++over;
    }
  }
  const double t = seconds_since(t0);
  return {same_reach && worst <= 0.08 && t < 30.0,
          "max " + fmt("%.4f", worst) + ", mean " + fmt("%.4f", n ? mean / static_cast<double>(n) : 0.0) + ", " +
              std::to_string(over) + " of " + std::to_string(n) + " cells over 8%" +
              (same_reach ? "" : ", reachable sets differ")};
}

struct Benchmark {
  bool ready = false;
  fs::path scenes;
  nlohmann::json metrics;
  double seconds = 0.0;
};

Benchmark benchmark(const fs::path& root) {
  Benchmark b;
  b.scenes = root / "scenes";
  const auto t0 = std::chrono::steady_clock::now();
  if (cli_call({"gen-scenes", "--count", "50", "--seed", "1", "--size", "64", "--density", "0.25", "--out",
                b.scenes.string(), "--force"}) != 0)
    return b;
  const fs::path out = root / "eval";
  if (cli_call({"eval", "--episodes", (b.scenes / "episodes.jsonl").string(), "--oracle", "geodesic", "--baseline",
                "explore-only", "--max-steps", "500", "--success-radius", "1.0", "--workers", "1", "--out",
                out.string(), "--force"}) != 0)
    return b;
  b.metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  b.seconds = seconds_since(t0);
  b.ready = true;
  return b;
}

Verdict perfect_oracle(const Benchmark& b) {
  if (!b.ready) return {false, "gen-scenes or eval failed"};
  const double sr = b.metrics.at("sr").get<double>();
  const double spl = b.metrics.at("spl").get<double>();
  return {sr == 1.0 && spl >= 0.60 && b.seconds < 300.0,
          "n " + std::to_string(b.metrics.at("n").get<int>()) + ", SR " + fmt("%.4f", sr) + ", SPL " +
              fmt("%.4f", spl) + ", both arms " + fmt("%.1f", b.seconds) + " s"};
}

Verdict ablation(const Benchmark& b) {
  if (!b.ready) return {false, "gen-scenes or eval failed"};
  const double spl = b.metrics.at("spl").get<double>();
  const auto& base = b.metrics.at("baseline");
  const double base_spl = base.at("spl").get<double>();
  const double base_sr = base.at("sr").get<double>();
  return {spl > base_spl && base_sr >= 0.8, "SPL geodesic " + fmt("%.4f", spl) + " vs explore-only " +
                                                fmt("%.4f", base_spl) + ", baseline SR " + fmt("%.4f", base_sr)};
}

// Speaks a fixed script of raw replies, parsed like a real model's.
struct ScriptedTextOracle final : Oracle {
  std::vector<std::string> replies;
  std::size_t next = 0;
  Guidance direction(const OracleRequest&) override { return parse_oracle_reply(replies[next++ % replies.size()]); }
  TerminateVerdict termination(const OracleRequest&) override {
    return parse_termination_reply(replies[next++ % replies.size()]);
  }
};

Verdict fuzz(const Benchmark& b) {
  if (!b.ready) return {false, "no generated scenes"};
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<cli::EpisodeEntry> entries = cli::load_episodes(b.scenes / "episodes.jsonl");
  std::vector<SceneMap> scenes;
  for (const auto& e : entries) scenes.push_back(load_scene_file(e.scene_path));

  const std::vector<std::string> nasty{"", " ", "LEFT!!", "go right or left", "\xff\xfe\x00", "left\nright",
                                       std::string(100000, 'x'), "stop", "yes", "forwardforward", "r i g h t",
                                       "explore", "no", "\x1b[31mleft\x1b[0m", "{\"guidance\": \"left\"}"};
  std::mt19937_64 rng(2024);
  std::size_t parsed = 0;
  for (const auto& s : nasty) {
    (void)parse_oracle_reply(s);
    (void)parse_termination_reply(s);
    parsed += 2;
  }
  for (int i = 0; i < 20000; ++i) {
    std::string s(rng() % 64, '\0');
    for (auto& ch : s) ch = static_cast<char>(rng() & 0xff);
    (void)parse_oracle_reply(s);
    (void)parse_termination_reply(s);
    parsed += 2;
  }

  int episodes = 0;
  int bad_pose = 0;
  int too_long = 0;
  std::vector<EpisodeResult> random_batch;
  std::vector<EpisodeResult> text_batch;
  EpisodeConfig config;
  config.max_steps = 500;
  auto check = [&](const SceneMap& s, const EpisodeResult& r) {
    ++episodes;
    if (r.steps > config.max_steps) ++too_long;
    for (const StepRecord& rec : r.log) {
      if (!s.is_free_point(rec.pose.position())) ++bad_pose;
    }
    if (!s.is_free_point(r.final_pose.position())) ++bad_pose;
  };
  for (int k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      EpisodeSpec spec = entries[i].spec;
      spec.seed = rng();
      RandomOracle oracle(spec.seed);
      EpisodeResult r = run_episode(scenes[i], spec, oracle, config);
      check(scenes[i], r);
      random_batch.push_back(std::move(r));
    }
  }
  for (std::size_t i = 0; i < entries.size(); i += 5) {
    ScriptedTextOracle oracle;
    oracle.replies = nasty;
    EpisodeResult r = run_episode(scenes[i], entries[i].spec, oracle, config);
    check(scenes[i], r);
    text_batch.push_back(std::move(r));
  }
  bool batch_ok = true;
  std::string batches;
  for (const auto* batch : {&random_batch, &text_batch}) {
    const double sr = compute_sr(*batch);
    const double spl = compute_spl(*batch);
    if (!(spl >= 0.0 && spl <= sr)) batch_ok = false;
    batches += " [SR " + fmt("%.3f", sr) + " SPL " + fmt("%.3f", spl) + "]";
  }
  const double t = seconds_since(t0);
  return {bad_pose == 0 && too_long == 0 && batch_ok && t < 300.0,
          std::to_string(episodes) + " episodes, " + std::to_string(parsed) + " replies parsed, " +
              std::to_string(bad_pose) + " poses in obstacles, " + std::to_string(too_long) + " over budget," +
              batches};
}

EpisodeResult outcome(bool success, double p, double l) {
  EpisodeResult r;
  r.success = success;
  r.path_length = p;
  r.shortest_length = l;
  return r;
}

Verdict metrics() {
  std::string bad;
  auto expect = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-12) bad += std::string(" ") + what + "=" + fmt("%.6f", got);
  };
  const std::vector<EpisodeResult> exact{outcome(true, 4.0, 4.0)};
  const std::vector<EpisodeResult> doubled{outcome(true, 8.0, 4.0)};
  const std::vector<EpisodeResult> failed{outcome(false, 3.0, 2.0)};
  // 1.0 + 0.5 + 0 + 1.0 (p < l counts as l) over 4.
  const std::vector<EpisodeResult> mixed{outcome(true, 4.0, 4.0), outcome(true, 8.0, 4.0), outcome(false, 1.0, 5.0),
                                         outcome(true, 2.0, 3.0)};
  expect("spl(p=l)", compute_spl(exact), 1.0);
  expect("spl(p=2l)", compute_spl(doubled), 0.5);
  expect("spl(fail)", compute_spl(failed), 0.0);
  expect("spl(mixed)", compute_spl(mixed), 2.5 / 4.0);
  expect("sr(mixed)", compute_sr(mixed), 0.75);
  expect("sr(fail)", compute_sr(failed), 0.0);
  expect("sr(exact)", compute_sr(exact), 1.0);
  return {bad.empty(), bad.empty() ? "7 cases exact" : "mismatch:" + bad};
}

Verdict determinism(const fs::path& root) {
  const std::string fixtures = NAVVLM_FIXTURES_DIR;
  std::vector<std::string> logs;
  for (const char* run : {"a", "b"}) {
    const fs::path out = root / "determinism" / run;
    const int rc = cli_call({"run", "--episodes", fixtures + "/episodes.jsonl", "--index", "1", "--oracle", "random",
                             "--seed", "7", "--out", out.string(), "--force"});
    if (rc != 0) return {false, "run exited " + std::to_string(rc)};
    logs.push_back(slurp(out / "steps.jsonl"));
  }
  const bool same = logs[0] == logs[1] && !logs[0].empty();
  return {same, std::to_string(logs[0].size()) + " bytes, " + (same ? "identical" : "differ")};
}

Verdict wire() {
  std::string bad;
  std::size_t n = 0;
  for (const auto& cases : {wire_stub::run_golden_cases(NAVVLM_GOLDEN_DIR), wire_stub::run_failure_cases()}) {
    for (const auto& c : cases) {
      ++n;
      if (!c.ok) bad += " " + c.name + " (" + c.detail + ")";
    }
  }
  return {bad.empty(), bad.empty() ? std::to_string(n) + " cases" : "failed:" + bad};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / ("navvlm_acceptance_" + std::to_string(getpid()));
  fs::remove_all(root);
  fs::create_directories(root);

  report("FMM accuracy", fmm_accuracy);
  report("FMM vs Dijkstra8", fmm_vs_dijkstra);
  const Benchmark b = benchmark(root);
  report("perfect-oracle navigation", [&] { return perfect_oracle(b); });
  report("ablation direction", [&] { return ablation(b); });
  report("robustness fuzz", [&] { return fuzz(b); });
  report("metric unit cases", metrics);
  report("determinism", [&] { return determinism(root); });
  report("wire-client conformance", wire);

  fs::remove_all(root);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
