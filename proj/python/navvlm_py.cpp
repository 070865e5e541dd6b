#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "navvlm/cli.hpp"
#include "navvlm/controller.hpp"
#include "navvlm/eikonal.hpp"
#include "navvlm/guidance.hpp"
#include "navvlm/scene.hpp"
#include "navvlm/scene_gen.hpp"

namespace py = pybind11;
using namespace navvlm;

namespace {

// Lets Python classes act as oracles inside run_episode.
class PyOracle : public Oracle {
 public:
  Guidance direction(const OracleRequest& request) override {
    PYBIND11_OVERRIDE_PURE(Guidance, Oracle, direction, request);
  }
  TerminateVerdict termination(const OracleRequest& request) override {
    PYBIND11_OVERRIDE_PURE(TerminateVerdict, Oracle, termination, request);
  }
};

std::vector<std::pair<int, int>> cell_list(const CellSet& cells) {
  std::vector<std::pair<int, int>> out;
  for (const Cell& c : cells) out.emplace_back(c.x, c.y);
  return out;
}

py::array_t<bool> mask_array(const TraversabilityMask& m) {
  py::array_t<bool> a({m.shape.height, m.shape.width});
  auto v = a.mutable_unchecked<2>();
  for (int y = 0; y < m.shape.height; ++y) {
    for (int x = 0; x < m.shape.width; ++x) v(y, x) = m.ok({x, y});
  }
  return a;
}

}  // namespace

PYBIND11_MODULE(navvlm, m) {
  m.doc() = "Grid-world object-goal navigation with pluggable guidance oracles.";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<SceneParseError>(m, "SceneParseError", PyExc_ValueError);
  py::register_exception<SceneGenError>(m, "SceneGenError", PyExc_RuntimeError);

  py::enum_<Action>(m, "Action")
      .value("Forward", Action::Forward)
      .value("TurnLeft", Action::TurnLeft)
      .value("TurnRight", Action::TurnRight)
      .value("Stop", Action::Stop);
  py::enum_<Guidance>(m, "Guidance")
      .value("Left", Guidance::Left)
      .value("Right", Guidance::Right)
      .value("Forward", Guidance::Forward)
      .value("Explore", Guidance::Explore)
      .value("NoInfo", Guidance::NoInfo);
  py::enum_<TerminateVerdict>(m, "TerminateVerdict")
      .value("Stop", TerminateVerdict::Stop)
      .value("Continue", TerminateVerdict::Continue);
  py::enum_<PromptKind>(m, "PromptKind")
      .value("TerminationCheck", PromptKind::TerminationCheck)
      .value("DirectionQuery", PromptKind::DirectionQuery);
  py::enum_<TerminationCause>(m, "TerminationCause")
      .value("VLMStop", TerminationCause::VLMStop)
      .value("ReachedGuided", TerminationCause::ReachedGuided)
      .value("ReachedFrontierExhausted", TerminationCause::ReachedFrontierExhausted)
      .value("MaxSteps", TerminationCause::MaxSteps)
      .value("PlannerStuck", TerminationCause::PlannerStuck);

  py::class_<AgentPose>(m, "AgentPose")
      .def(py::init<>())
      .def(py::init([](double x, double y, double heading) { return AgentPose{x, y, heading}; }), py::arg("x"),
           py::arg("y"), py::arg("heading") = 0.0)
      .def_readwrite("x", &AgentPose::x)
      .def_readwrite("y", &AgentPose::y)
      .def_readwrite("heading", &AgentPose::heading)
      .def(py::self == py::self)
      .def("__repr__", [](const AgentPose& p) {
        return "AgentPose(" + format_number(p.x) + ", " + format_number(p.y) + ", " + format_number(p.heading) + ")";
      });

  py::class_<SceneMap>(m, "SceneMap")
      .def_property_readonly("id", &SceneMap::id)
      .def_property_readonly("width", &SceneMap::width)
      .def_property_readonly("height", &SceneMap::height)
      .def_property_readonly("resolution", &SceneMap::resolution)
      .def_property_readonly("goal_labels",
                             [](const SceneMap& s) {
                               std::vector<std::string> out;
                               for (const auto& g : s.goal_regions()) out.push_back(g.label);
                               return out;
                             })
      .def("goal_cells",
           [](const SceneMap& s, const std::string& label) {
             const GoalRegion* g = s.find_goal(label);
             if (g == nullptr) throw py::key_error(label);
             return cell_list(g->cells);
           })
      .def("is_free", [](const SceneMap& s, int x, int y) { return s.is_free({x, y}); })
      .def("is_free_point", [](const SceneMap& s, double x, double y) { return s.is_free_point({x, y}); })
      .def("free_count", &SceneMap::free_count)
      .def("free_mask", [](const SceneMap& s) { return mask_array(s.free_mask()); },
           "Boolean array indexed [y, x].")
      .def("to_text", &SceneMap::to_text);

  m.def("load_scene", &load_scene, py::arg("text"), py::arg("id") = std::string());
  m.def("load_scene_file", &load_scene_file, py::arg("path"));

  py::class_<DepthScan>(m, "DepthScan")
      .def_readonly("fov", &DepthScan::fov)
      .def_readonly("max_range", &DepthScan::max_range)
      .def_readonly("ranges", &DepthScan::ranges)
      .def_readonly("hit", &DepthScan::hit)
      .def("bearing", &DepthScan::bearing);

  m.def(
      "raycast_depth",
      [](const SceneMap& s, const AgentPose& p, int n_rays, double fov, double max_range) {
        return raycast_depth(s, p, n_rays, fov, max_range);
      },
      py::arg("scene"), py::arg("pose"), py::arg("n_rays") = 120, py::arg("fov") = 90.0, py::arg("max_range") = 5.0);
  m.def(
      "step",
      [](const SceneMap& s, const AgentPose& p, Action a) {
        const StepOutcome o = step(s, p, a);
        return py::make_tuple(o.pose, o.collision);
      },
      py::arg("scene"), py::arg("pose"), py::arg("action"), "Returns (pose, collided).");
  m.def(
      "geodesic_distance",
      [](const SceneMap& s, const AgentPose& p, const std::string& label) {
        const GoalRegion* g = s.find_goal(label);
        if (g == nullptr) throw py::key_error(label);
        return geodesic_distance(s, p, g->cells);
      },
      py::arg("scene"), py::arg("pose"), py::arg("goal_label"));

  m.def(
      "fmm_solve",
      [](py::array_t<bool, py::array::c_style | py::array::forcecast> mask,
         const std::vector<std::pair<int, int>>& sources, double h) {
        if (mask.ndim() != 2) throw ContractError("mask must be 2-D, indexed [y, x]");
        const GridShape shape{static_cast<int>(mask.shape(1)), static_cast<int>(mask.shape(0)), h};
        TraversabilityMask tm(shape, false);
        auto v = mask.unchecked<2>();
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) tm.set({x, y}, v(y, x));
        }
        CellSet src;
        for (const auto& [x, y] : sources) src.insert({x, y});
        const DistanceField f = fmm_solve(tm, src, h);
        py::array_t<double> out({shape.height, shape.width});
        std::copy(f.T.begin(), f.T.end(), out.mutable_data());
        return out;
      },
      py::arg("mask"), py::arg("sources"), py::arg("h") = 1.0,
      "Travel time over True cells from (x, y) sources; inf where unreached.");

  m.def("parse_oracle_reply", &parse_oracle_reply, py::arg("text"));
  m.def("parse_termination_reply", &parse_termination_reply, py::arg("text"));

  py::class_<OracleRequest>(m, "OracleRequest")
      .def_readonly("prompt_kind", &OracleRequest::prompt_kind)
      .def_readonly("goal", &OracleRequest::goal)
      .def_readonly("fov", &OracleRequest::fov)
      .def_readonly("step", &OracleRequest::step)
      .def_readonly("pose", &OracleRequest::pose)
      .def_property_readonly("ranges",
                             [](const OracleRequest& r) -> py::object {
                               if (const auto* s = std::get_if<SceneSnapshot>(&r.observation)) return py::cast(s->ranges);
                               return py::none();
                             })
      .def_property_readonly("visible_labels", [](const OracleRequest& r) -> py::object {
        if (const auto* s = std::get_if<SceneSnapshot>(&r.observation)) return py::cast(s->visible_labels);
        return py::none();
      });

  py::class_<Oracle, PyOracle>(m, "Oracle")
      .def(py::init<>())
      .def("direction", &Oracle::direction)
      .def("termination", &Oracle::termination);

  py::class_<EpisodeSpec>(m, "EpisodeSpec")
      .def(py::init([](std::string scene_id, AgentPose start, std::string goal_text, std::string goal_label,
                       std::uint64_t seed) {
             return EpisodeSpec{std::move(scene_id), start, std::move(goal_text), std::move(goal_label), seed};
           }),
           py::arg("scene_id"), py::arg("start"), py::arg("goal_text"), py::arg("goal_label"), py::arg("seed") = 0)
      .def_readwrite("scene_id", &EpisodeSpec::scene_id)
      .def_readwrite("start", &EpisodeSpec::start)
      .def_readwrite("goal_text", &EpisodeSpec::goal_text)
      .def_readwrite("goal_label", &EpisodeSpec::goal_label)
      .def_readwrite("seed", &EpisodeSpec::seed);

  py::class_<EpisodeConfig>(m, "EpisodeConfig")
      .def(py::init<>())
      .def_readwrite("max_steps", &EpisodeConfig::max_steps)
      .def_readwrite("success_radius", &EpisodeConfig::success_radius)
      .def_readwrite("oracle_cadence", &EpisodeConfig::oracle_cadence)
      .def_readwrite("replan_interval", &EpisodeConfig::replan_interval)
      .def_readwrite("stg_reach_threshold", &EpisodeConfig::stg_reach_threshold)
      .def_readwrite("dilation_radius", &EpisodeConfig::dilation_radius);

  py::class_<EpisodeResult>(m, "EpisodeResult")
      .def_readonly("success", &EpisodeResult::success)
      .def_readonly("steps", &EpisodeResult::steps)
      .def_readonly("path_length", &EpisodeResult::path_length)
      .def_readonly("shortest_length", &EpisodeResult::shortest_length)
      .def_readonly("cause", &EpisodeResult::cause)
      .def_readonly("collision_count", &EpisodeResult::collision_count)
      .def_readonly("final_pose", &EpisodeResult::final_pose)
      .def("trajectory",
           [](const EpisodeResult& r) {
             std::vector<std::pair<double, double>> out;
             for (const Point2& p : trajectory(r)) out.emplace_back(p.x, p.y);
             return out;
           })
      .def("log_jsonl", &step_log_jsonl)
      .def("to_json", &result_json);

  // The built-in oracles borrow the scene, so it has to outlive them.
  m.def(
      "make_oracle",
      [](const std::string& selector, const SceneMap& scene, const EpisodeSpec& spec, const EpisodeConfig& config,
         std::uint64_t seed) {
        return cli::make_oracle(cli::parse_oracle_selector(selector), scene, spec, config, seed);
      },
      py::arg("selector"), py::arg("scene"), py::arg("spec"), py::arg("config") = EpisodeConfig(),
      py::arg("seed") = 0, py::keep_alive<0, 2>(),
      "geodesic | random | explore-only | stop-at:K | remote:URL");

  m.def(
      "run_episode",
      [](const SceneMap& scene, const EpisodeSpec& spec, Oracle& oracle, const EpisodeConfig& config) {
        return run_episode(scene, spec, oracle, config);
      },
      py::arg("scene"), py::arg("spec"), py::arg("oracle"), py::arg("config") = EpisodeConfig());

  m.def("compute_sr", [](const std::vector<EpisodeResult>& r) { return compute_sr(r); });
  m.def("compute_spl", [](const std::vector<EpisodeResult>& r) { return compute_spl(r); });

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int index, int size, double density, double resolution) {
        SceneGenConfig c;
        c.size = size;
        c.obstacle_density = density;
        c.resolution = resolution;
        GeneratedEpisode g = generate_scene(c, seed, index);
        return py::make_tuple(std::move(g.scene), g.episode);
      },
      py::arg("seed"), py::arg("index") = 0, py::arg("size") = 64, py::arg("density") = 0.25,
      py::arg("resolution") = 0.1, "Returns (scene, episode_spec).");

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "navvlm");
        return cli::main(args);
      },
      py::arg("args"), "Runs the navvlm command line with these arguments; returns the exit status.");
}
