#pragma once

#include <string>
#include <vector>

#include "navvlm/scene.hpp"

namespace testing {

inline std::string fixture_path(const std::string& name) { return std::string(NAVVLM_FIXTURES_DIR) + "/" + name; }
inline std::string golden_path(const std::string& name) { return std::string(NAVVLM_GOLDEN_DIR) + "/" + name; }

inline navvlm::SceneMap fixture(const std::string& name) { return navvlm::load_scene_file(fixture_path(name)); }

// rows[0] is y = 0
inline navvlm::SceneMap scene_from_rows(const std::vector<std::string>& rows, double resolution,
                                        const std::string& goals = {}) {
  std::string text = "resolution " + navvlm::format_number(resolution) + "\n";
  if (!goals.empty()) text += "goals " + goals + "\n";
  for (const auto& r : rows) text += r + "\n";
  return navvlm::load_scene(text, "inline");
}

// Open room of w x h cells with a border wall.
inline std::vector<std::string> room_rows(int w, int h) {
  std::vector<std::string> rows(static_cast<std::size_t>(h), std::string(static_cast<std::size_t>(w), '.'));
  for (auto& r : rows) r.front() = r.back() = '#';
  rows.front() = rows.back() = std::string(static_cast<std::size_t>(w), '#');
  return rows;
}

}  // namespace testing
