#include "navvlm/grid.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>

namespace navvlm {

std::string to_string(const Cell& c) { return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")"; }

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

namespace {

// Quarter-turn index when `degrees` is an exact multiple of 90, else -1.
int quarter_turns(double degrees) {
  const double q = degrees / 90.0;
  if (q != std::floor(q)) return -1;
  const long long k = static_cast<long long>(q);
  return static_cast<int>(((k % 4) + 4) % 4);
}

}  // namespace

double cos_deg(double degrees) {
  switch (quarter_turns(degrees)) {
    case 0: return 1.0;
    case 1: return 0.0;
    case 2: return -1.0;
    case 3: return 0.0;
    default: return std::cos(degrees * std::numbers::pi / 180.0);
  }
}

double sin_deg(double degrees) {
  switch (quarter_turns(degrees)) {
    case 0: return 0.0;
    case 1: return 1.0;
    case 2: return 0.0;
    case 3: return -1.0;
    default: return std::sin(degrees * std::numbers::pi / 180.0);
  }
}

double normalize_heading(double degrees) {
  double h = std::fmod(degrees, 360.0);
  if (h < 0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h;
}

double normalize_bearing(double degrees) {
  double b = normalize_heading(degrees);
  if (b > 180.0) b -= 360.0;
  return b;
}

}  // namespace navvlm
