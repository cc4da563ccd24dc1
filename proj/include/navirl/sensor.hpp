#pragma once

#include <cstdint>
#include <vector>

#include "navirl/grid.hpp"

namespace navirl {

struct LidarConfig {
  int beams = 72;
  double max_range = 2.5;
  double noise_sigma = 0.05;
};

// One 360 degree scan. Beam k points at angle 2*pi*k/K measured from +x
// towards +y (rows grow downwards, so +y is "south").
struct LidarScan {
  std::vector<double> ranges;
  double max_range = 0.0;

  int beams() const { return static_cast<int>(ranges.size()); }
};

double beam_angle(int k, int beams);

// Noise-free ray casting from the center of `pose`. Occupied cells are closed
// unit boxes; a ray that only grazes a box corner does not hit it. Rays that
// leave the map report max_range.
LidarScan cast_rays(const GridMap& map, State pose, int beams, double max_range);

// Adds independent N(0, sigma^2) noise to every range and clips to [0, max_range].
LidarScan add_noise(const LidarScan& scan, double sigma, std::uint64_t seed);

inline LidarScan observe(const GridMap& map, State pose, const LidarConfig& cfg,
                         std::uint64_t seed) {
  return add_noise(cast_rays(map, pose, cfg.beams, cfg.max_range), cfg.noise_sigma, seed);
}

}  // namespace navirl
