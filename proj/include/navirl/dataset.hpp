#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "navirl/grid.hpp"
#include "navirl/sensor.hpp"

namespace navirl {

// One expert episode. controls[k] moves states[k] to states[k+1]; scans[k] is
// recorded at states[k], including at the goal.
struct Demonstration {
  int map_id = 0;
  State start;
  State goal;
  std::vector<State> states;
  std::vector<Control> controls;
  std::vector<LidarScan> scans;

  int steps() const { return static_cast<int>(controls.size()); }
};

// Greedy descent of the oracle step-count field, ties broken by control order.
// Throws std::invalid_argument if start and goal are not free and connected.
Demonstration generate_demo(const GridMap& map, State start, State goal,
                            const LidarConfig& sensor, std::uint64_t noise_seed);

struct DatasetConfig {
  int width = 16;
  int height = 16;
  double obstacle_density = 0.2;
  int maps = 10;
  int trajectories_per_map = 10;
  int min_distance = 4;
  std::uint64_t seed = 1;
  int first_map_id = 0;
  // Sampling attempts per map before the map is redrawn.
  int max_attempts = 1000;
};

struct Dataset {
  std::vector<GridMap> maps;
  std::vector<Demonstration> demos;
};

// Maps and demonstrations depend only on (seed, map index), never on thread
// count. Throws std::invalid_argument when the config cannot yield free
// start/goal pairs (for example density >= 1).
Dataset generate_dataset(const DatasetConfig& cfg, const LidarConfig& sensor,
                         unsigned threads = 1);

// One JSON object per line with map_id, start, goal, states, controls, scans.
void write_demos_jsonl(std::ostream& out, const std::vector<Demonstration>& demos);
std::vector<Demonstration> read_demos_jsonl(std::istream& in, double max_range);

std::string demo_to_json_line(const Demonstration& demo);
Demonstration demo_from_json_line(const std::string& line, double max_range);

}  // namespace navirl
