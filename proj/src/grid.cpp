#include "navirl/grid.hpp"

#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "navirl/io.hpp"

namespace navirl {

namespace {
constexpr std::array<std::string_view, kNumControls> kControlNames = {
    "N", "NE", "E", "SE", "S", "SW", "W", "NW"};
}

std::string_view control_name(Control u) { return kControlNames[index_of(u)]; }

std::optional<Control> parse_control(std::string_view name) {
  for (int i = 0; i < kNumControls; ++i) {
    if (kControlNames[i] == name) return control_at(i);
  }
  return std::nullopt;
}

GridMap::GridMap(int width, int height)
    : GridMap(width, height,
              std::vector<std::int8_t>(width > 0 && height > 0 ? width * height : 0, kFree)) {}

GridMap::GridMap(int width, int height, std::vector<std::int8_t> cells)
    : width_(width), height_(height), cells_(std::move(cells)) {
  if (width < 2 || height < 2) {
    throw std::invalid_argument("GridMap: width and height must be >= 2");
  }
  if (static_cast<int>(cells_.size()) != width * height) {
    throw std::invalid_argument("GridMap: cell count does not match dimensions");
  }
  for (auto c : cells_) {
    if (c != kFree && c != kOccupied) {
      throw std::invalid_argument("GridMap: labels must be -1 or +1");
    }
  }
}

void GridMap::set(State s, std::int8_t label) {
  if (label != kFree && label != kOccupied) {
    throw std::invalid_argument("GridMap::set: label must be -1 or +1");
  }
  cells_[index(s)] = label;
}

std::vector<State> GridMap::free_cells() const {
  std::vector<State> out;
  for (int i = 0; i < size(); ++i) {
    if (cells_[i] == kFree) out.push_back(state_at(i));
  }
  return out;
}

GridMap generate_map(std::uint64_t seed, int width, int height, double obstacle_density) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("generate_map: zero-area map");
  }
  if (!(obstacle_density >= 0.0 && obstacle_density <= 1.0)) {
    throw std::invalid_argument("generate_map: density must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::int8_t> cells(static_cast<std::size_t>(width) * height);
  for (auto& c : cells) {
    c = unit(rng) < obstacle_density ? GridMap::kOccupied : GridMap::kFree;
  }
  return GridMap(width, height, std::move(cells));
}

std::vector<int> oracle_cost_to_go(const GridMap& map, State goal) {
  if (!map.in_bounds(goal) || map.occupied(goal)) {
    throw std::invalid_argument("oracle_cost_to_go: goal must be a free in-bounds cell");
  }
  std::vector<int> dist(map.size(), kUnreachable);
  std::deque<State> frontier{goal};
  dist[map.index(goal)] = 0;
  while (!frontier.empty()) {
    State s = frontier.front();
    frontier.pop_front();
    int d = dist[map.index(s)];
    // Moves are reversible, so successors of s are also its predecessors.
    for (Control u : kAllControls) {
      auto n = step(map, s, u);
      if (!n || map.occupied(*n)) continue;
      int& dn = dist[map.index(*n)];
      if (dn == kUnreachable) {
        dn = d + 1;
        frontier.push_back(*n);
      }
    }
  }
  return dist;
}

void write_map(std::ostream& out, const GridMap& map) {
  out << "P-GRID " << map.width() << ' ' << map.height() << '\n';
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) out << (map.occupied({x, y}) ? '#' : '.');
    out << '\n';
  }
}

GridMap read_map(std::istream& in) {
  std::string header;
  int width = 0;
  int height = 0;
  if (!(in >> header >> width >> height) || header != "P-GRID") {
    throw std::runtime_error("read_map: missing 'P-GRID <w> <h>' header");
  }
  if (width < 2 || height < 2) throw std::runtime_error("read_map: bad dimensions");
  std::vector<std::int8_t> cells;
  cells.reserve(static_cast<std::size_t>(width) * height);
  std::string line;
  std::getline(in, line);
  for (int y = 0; y < height; ++y) {
    if (!std::getline(in, line)) throw std::runtime_error("read_map: truncated map body");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != width) {
      throw std::runtime_error("read_map: row " + std::to_string(y) + " has wrong width");
    }
    for (char ch : line) {
      if (ch == '.') cells.push_back(GridMap::kFree);
      else if (ch == '#') cells.push_back(GridMap::kOccupied);
      else throw std::runtime_error(std::string("read_map: unexpected character '") + ch + "'");
    }
  }
  return GridMap(width, height, std::move(cells));
}

void save_map(const std::string& path, const GridMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_map(out, map);
  if (!out) throw IoError("failed writing " + path);
}

GridMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open map file " + path);
  try {
    return read_map(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace navirl
