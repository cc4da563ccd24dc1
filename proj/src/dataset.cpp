#include "navirl/dataset.hpp"

#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "navirl/io.hpp"
#include "navirl/parallel.hpp"

namespace navirl {

using nlohmann::json;

Demonstration generate_demo(const GridMap& map, State start, State goal,
                            const LidarConfig& sensor, std::uint64_t noise_seed) {
  if (!map.in_bounds(start) || !map.in_bounds(goal) || map.occupied(start) ||
      map.occupied(goal)) {
    throw std::invalid_argument("generate_demo: start and goal must be free cells");
  }
  const auto field = oracle_cost_to_go(map, goal);
  if (field[map.index(start)] == kUnreachable) {
    throw std::invalid_argument("generate_demo: start cannot reach goal");
  }
  Demonstration demo;
  demo.start = start;
  demo.goal = goal;
  State s = start;
  demo.states.push_back(s);
  while (!(s == goal)) {
    const int here = field[map.index(s)];
    std::optional<Control> best;
    for (Control u : kAllControls) {
      auto n = step(map, s, u);
      if (n && field[map.index(*n)] == here - 1) {
        best = u;
        break;
      }
    }
    // A finite non-zero BFS distance always has a neighbour one step closer.
    s = *step(map, s, *best);
    demo.controls.push_back(*best);
    demo.states.push_back(s);
  }
  demo.scans.reserve(demo.states.size());
  for (std::size_t k = 0; k < demo.states.size(); ++k) {
    demo.scans.push_back(observe(map, demo.states[k], sensor, derive_seed(noise_seed, k)));
  }
  return demo;
}

namespace {

struct MapSamples {
  GridMap map;
  std::vector<Demonstration> demos;
};

MapSamples sample_map(const DatasetConfig& cfg, const LidarConfig& sensor, int map_index) {
  const std::uint64_t base = derive_seed(cfg.seed, static_cast<std::uint64_t>(map_index));
  for (std::uint64_t redraw = 0;; ++redraw) {
    if (redraw > 1000) {
      throw std::invalid_argument("generate_dataset: could not sample start/goal pairs");
    }
    const std::uint64_t map_seed = derive_seed(base, redraw);
    MapSamples out{generate_map(map_seed, cfg.width, cfg.height, cfg.obstacle_density), {}};
    auto free = out.map.free_cells();
    if (free.size() < 2) continue;
    std::mt19937_64 rng(derive_seed(map_seed, 0xfeed));
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    int attempts = 0;
    while (static_cast<int>(out.demos.size()) < cfg.trajectories_per_map &&
           attempts < cfg.max_attempts) {
      ++attempts;
      State start = free[pick(rng)];
      State goal = free[pick(rng)];
      const auto field = oracle_cost_to_go(out.map, goal);
      const int d = field[out.map.index(start)];
      if (d == kUnreachable || d < cfg.min_distance) continue;
      auto demo = generate_demo(out.map, start, goal, sensor,
                                derive_seed(map_seed, 1000 + out.demos.size()));
      demo.map_id = cfg.first_map_id + map_index;
      out.demos.push_back(std::move(demo));
    }
    if (static_cast<int>(out.demos.size()) == cfg.trajectories_per_map) return out;
  }
}

}  // namespace

Dataset generate_dataset(const DatasetConfig& cfg, const LidarConfig& sensor, unsigned threads) {
  if (cfg.width <= 0 || cfg.height <= 0) {
    throw std::invalid_argument("generate_dataset: zero-area map");
  }
  if (!(cfg.obstacle_density >= 0.0 && cfg.obstacle_density < 1.0)) {
    throw std::invalid_argument("generate_dataset: density must lie in [0, 1)");
  }
  if (cfg.maps < 0 || cfg.trajectories_per_map < 0) {
    throw std::invalid_argument("generate_dataset: negative counts");
  }
  if (cfg.min_distance > cfg.width + cfg.height) {
    throw std::invalid_argument("generate_dataset: min_distance exceeds map size");
  }
  std::vector<MapSamples> per_map(cfg.maps);
  parallel_for(per_map.size(), threads,
               [&](std::size_t i) { per_map[i] = sample_map(cfg, sensor, static_cast<int>(i)); });
  Dataset ds;
  for (auto& m : per_map) {
    ds.maps.push_back(std::move(m.map));
    for (auto& d : m.demos) ds.demos.push_back(std::move(d));
  }
  return ds;
}

namespace {
json state_json(State s) { return json::array({s.x, s.y}); }
State state_from(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }
}  // namespace

std::string demo_to_json_line(const Demonstration& demo) {
  json j;
  j["map_id"] = demo.map_id;
  j["start"] = state_json(demo.start);
  j["goal"] = state_json(demo.goal);
  json states = json::array();
  for (auto s : demo.states) states.push_back(state_json(s));
  j["states"] = std::move(states);
  json controls = json::array();
  for (auto u : demo.controls) controls.push_back(std::string(control_name(u)));
  j["controls"] = std::move(controls);
  json scans = json::array();
  for (const auto& z : demo.scans) scans.push_back(z.ranges);
  j["scans"] = std::move(scans);
  return j.dump();
}

Demonstration demo_from_json_line(const std::string& line, double max_range) {
  const json j = json::parse(line);
  Demonstration d;
  d.map_id = j.at("map_id").get<int>();
  d.start = state_from(j.at("start"));
  d.goal = state_from(j.at("goal"));
  for (const auto& s : j.at("states")) d.states.push_back(state_from(s));
  for (const auto& u : j.at("controls")) {
    auto c = parse_control(u.get<std::string>());
    if (!c) throw std::runtime_error("unknown control '" + u.get<std::string>() + "'");
    d.controls.push_back(*c);
  }
  for (const auto& z : j.at("scans")) {
    LidarScan scan;
    scan.max_range = max_range;
    scan.ranges = z.get<std::vector<double>>();
    d.scans.push_back(std::move(scan));
  }
  if (d.states.empty() || d.controls.size() + 1 != d.states.size() ||
      d.scans.size() != d.states.size()) {
    throw std::runtime_error("demonstration has inconsistent sequence lengths");
  }
  return d;
}

void write_demos_jsonl(std::ostream& out, const std::vector<Demonstration>& demos) {
  for (const auto& d : demos) out << demo_to_json_line(d) << '\n';
}

std::vector<Demonstration> read_demos_jsonl(std::istream& in, double max_range) {
  std::vector<Demonstration> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(demo_from_json_line(line, max_range));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace navirl
