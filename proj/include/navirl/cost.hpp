#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "navirl/belief.hpp"
#include "navirl/grid.hpp"

namespace navirl {

enum class CostMode { hard_coded, soft_coded };

// Expected-traversal-cost encoder: s for a free transition, l for a collision.
struct CostEncoderParams {
  double s = 1.0;
  double l = 100.0;
  CostMode mode = CostMode::soft_coded;
};

// Probability that both endpoints of the move are free under the belief.
// Free probability of a cell is sigmoid(-h).
double free_transition_prob(const BeliefState& h, State x, State next);

// s q + l (1 - q); l for moves that leave the map.
double expected_cost(const BeliefState& h, State x, Control u, const CostEncoderParams& params);

struct CostGrads {
  double ds = 0.0;
  double dl = 0.0;
  double dh_from = 0.0;  // d c / d h[x]
  double dh_to = 0.0;    // d c / d h[f(x, u)]
  int from_cell = -1;
  int to_cell = -1;      // -1 for off-map moves
};

CostGrads cost_grads(const BeliefState& h, State x, Control u, const CostEncoderParams& params);

// Stage cost over all (state, control) pairs of one lattice. Belief-derived
// costs are evaluated lazily from cached free probabilities; individual
// entries can be overridden, which switches the field to an explicit table.
class CostField {
 public:
  CostField(const BeliefState& h, const CostEncoderParams& params);
  // Uniform cost for every in-bounds move, `off_grid` for the rest.
  static CostField uniform(int width, int height, double value, double off_grid);

  int width() const { return width_; }
  int height() const { return height_; }
  int cells() const { return width_ * height_; }
  double large() const { return l_; }
  double min_cost() const { return min_cost_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  // Cost of applying control u at cell index `cell`.
  double operator()(int cell, Control u) const {
    if (!table_.empty()) return table_[static_cast<std::size_t>(cell) * kNumControls + index_of(u)];
    const int x = cell % width_ + kDx[index_of(u)];
    const int y = cell / width_ + kDy[index_of(u)];
    if (!in_bounds(x, y)) return l_;
    const double q = pfree_[cell] * pfree_[y * width_ + x];
    return s_ * q + l_ * (1.0 - q);
  }
  double operator()(State x, Control u) const { return (*this)(x.y * width_ + x.x, u); }

  void set(State x, Control u, double value);

  void write_csv(std::ostream& out) const;

 private:
  CostField(int width, int height, double s, double l);
  void materialize();

  int width_ = 0;
  int height_ = 0;
  double s_ = 1.0;
  double l_ = 100.0;
  double min_cost_ = 0.0;
  std::vector<double> pfree_;
  std::vector<double> table_;
};

}  // namespace navirl
