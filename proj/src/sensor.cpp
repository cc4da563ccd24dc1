#include "navirl/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace navirl {

namespace {

// Crossing distances closer than this are treated as simultaneous, which is
// how a ray through an exact lattice corner passes diagonally.
constexpr double kCornerTol = 1e-9;

double cast_one(const GridMap& map, State pose, double angle, double max_range) {
  double dx = std::cos(angle);
  double dy = std::sin(angle);
  if (std::abs(dx) < 1e-12) dx = 0.0;
  if (std::abs(dy) < 1e-12) dy = 0.0;

  int cx = pose.x;
  int cy = pose.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double delta_x = step_x != 0 ? 1.0 / std::abs(dx) : inf;
  const double delta_y = step_y != 0 ? 1.0 / std::abs(dy) : inf;
  // Origin is a cell center, so the first boundary is half a cell away.
  double next_x = step_x != 0 ? 0.5 * delta_x : inf;
  double next_y = step_y != 0 ? 0.5 * delta_y : inf;

  for (;;) {
    double t;
    if (step_x != 0 && step_y != 0 &&
        std::abs(next_x - next_y) <= kCornerTol * std::max(1.0, next_x)) {
      t = next_x;
      cx += step_x;
      cy += step_y;
      next_x += delta_x;
      next_y += delta_y;
    } else if (next_x < next_y) {
      t = next_x;
      cx += step_x;
      next_x += delta_x;
    } else {
      t = next_y;
      cy += step_y;
      next_y += delta_y;
    }
    if (t >= max_range) return max_range;
    State c{cx, cy};
    if (!map.in_bounds(c)) return max_range;
    if (map.occupied(c)) return t;
  }
}

}  // namespace

double beam_angle(int k, int beams) {
  return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(beams);
}

LidarScan cast_rays(const GridMap& map, State pose, int beams, double max_range) {
  if (!map.in_bounds(pose)) throw std::invalid_argument("cast_rays: pose out of bounds");
  if (map.occupied(pose)) throw std::invalid_argument("cast_rays: pose inside an obstacle");
  if (beams <= 0) throw std::invalid_argument("cast_rays: beam count must be positive");
  if (!(max_range > 0.0)) throw std::invalid_argument("cast_rays: max_range must be positive");
  LidarScan scan;
  scan.max_range = max_range;
  scan.ranges.resize(beams);
  for (int k = 0; k < beams; ++k) {
    scan.ranges[k] = cast_one(map, pose, beam_angle(k, beams), max_range);
  }
  return scan;
}

LidarScan add_noise(const LidarScan& scan, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return scan;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  LidarScan out = scan;
  for (auto& r : out.ranges) r = std::clamp(r + noise(rng), 0.0, scan.max_range);
  return out;
}

}  // namespace navirl
