#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace navirl {

// Robot pose on the lattice: x is the column, y is the row (row 0 at the top).
struct State {
  int x = 0;
  int y = 0;

  friend bool operator==(const State&, const State&) = default;
};

// The 8 compass moves. The enumeration order is also the deterministic
// tie-break order used throughout (expert descent, greedy rollouts).
enum class Control : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

inline constexpr int kNumControls = 8;

inline constexpr std::array<Control, kNumControls> kAllControls = {
    Control::N, Control::NE, Control::E, Control::SE,
    Control::S, Control::SW, Control::W, Control::NW};

inline constexpr std::array<int, kNumControls> kDx = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, kNumControls> kDy = {-1, -1, 0, 1, 1, 1, 0, -1};

constexpr int index_of(Control u) { return static_cast<int>(u); }
constexpr Control control_at(int i) { return static_cast<Control>(i); }

// The move that undoes u.
constexpr Control reverse(Control u) { return control_at((index_of(u) + 4) % kNumControls); }

std::string_view control_name(Control u);
std::optional<Control> parse_control(std::string_view name);

// Ground-truth occupancy labels: -1 free, +1 occupied, row-major.
class GridMap {
 public:
  static constexpr std::int8_t kFree = -1;
  static constexpr std::int8_t kOccupied = 1;

  GridMap() = default;
  // All cells free. Throws std::invalid_argument if either side is < 2.
  GridMap(int width, int height);
  GridMap(int width, int height, std::vector<std::int8_t> cells);

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }

  bool in_bounds(State s) const {
    return s.x >= 0 && s.y >= 0 && s.x < width_ && s.y < height_;
  }
  int index(State s) const { return s.y * width_ + s.x; }
  State state_at(int idx) const { return {idx % width_, idx / width_}; }

  std::int8_t label(State s) const { return cells_[index(s)]; }
  bool free(State s) const { return cells_[index(s)] == kFree; }
  bool occupied(State s) const { return cells_[index(s)] == kOccupied; }
  void set(State s, std::int8_t label);

  const std::vector<std::int8_t>& cells() const { return cells_; }
  std::vector<State> free_cells() const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int8_t> cells_;
};

// Deterministic dynamics. Returns nullopt when the move leaves the map; does
// not look at occupancy.
inline std::optional<State> step(const GridMap& map, State s, Control u) {
  State next{s.x + kDx[index_of(u)], s.y + kDy[index_of(u)]};
  if (!map.in_bounds(next)) return std::nullopt;
  return next;
}

inline int chebyshev(State a, State b) {
  int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx > dy ? dx : dy;
}

// Each cell occupied independently with probability `obstacle_density`.
GridMap generate_map(std::uint64_t seed, int width, int height, double obstacle_density);

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

// Minimum number of 8-connected unit moves from every cell to `goal` through
// free cells. Occupied and unreachable cells hold kUnreachable.
std::vector<int> oracle_cost_to_go(const GridMap& map, State goal);

// Text map format: "P-GRID <w> <h>" then h lines of w chars, '.' free, '#' occupied.
void write_map(std::ostream& out, const GridMap& map);
GridMap read_map(std::istream& in);
void save_map(const std::string& path, const GridMap& map);
GridMap load_map(const std::string& path);

}  // namespace navirl
