#include "navirl/cost.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace navirl {

namespace {

void check_params(const CostEncoderParams& p) {
  if (!(p.s > 0.0 && p.l > p.s)) {
    throw std::invalid_argument("cost encoder requires 0 < s < l");
  }
}

std::optional<State> lattice_step(const BeliefState& h, State x, Control u) {
  State n{x.x + kDx[index_of(u)], x.y + kDy[index_of(u)]};
  if (n.x < 0 || n.y < 0 || n.x >= h.width() || n.y >= h.height()) return std::nullopt;
  return n;
}

}  // namespace

double free_transition_prob(const BeliefState& h, State x, State next) {
  return sigmoid(-h.at(x)) * sigmoid(-h.at(next));
}

double expected_cost(const BeliefState& h, State x, Control u, const CostEncoderParams& params) {
  auto next = lattice_step(h, x, u);
  if (!next) return params.l;
  const double q = free_transition_prob(h, x, *next);
  return params.s * q + params.l * (1.0 - q);
}

CostGrads cost_grads(const BeliefState& h, State x, Control u, const CostEncoderParams& params) {
  CostGrads g;
  g.from_cell = h.index(x);
  auto next = lattice_step(h, x, u);
  if (!next) {
    g.dl = 1.0;
    return g;
  }
  g.to_cell = h.index(*next);
  const double occ_from = sigmoid(h.at(x));
  const double occ_to = sigmoid(h.at(*next));
  const double free_from = sigmoid(-h.at(x));
  const double free_to = sigmoid(-h.at(*next));
  const double q = free_from * free_to;
  g.ds = q;
  g.dl = 1.0 - q;
  // d sigmoid(-h) / dh = -sigmoid(-h) sigmoid(h)
  g.dh_from = (params.s - params.l) * (-free_from * occ_from * free_to);
  g.dh_to = (params.s - params.l) * (-free_to * occ_to * free_from);
  return g;
}

CostField::CostField(int width, int height, double s, double l)
    : width_(width), height_(height), s_(s), l_(l), min_cost_(s) {}

CostField::CostField(const BeliefState& h, const CostEncoderParams& params)
    : CostField(h.width(), h.height(), params.s, params.l) {
  check_params(params);
  pfree_.resize(h.size());
  for (int j = 0; j < h.size(); ++j) pfree_[j] = sigmoid(-h[j]);
}

CostField CostField::uniform(int width, int height, double value, double off_grid) {
  if (!(value > 0.0) || off_grid < value) {
    throw std::invalid_argument("CostField::uniform: need 0 < value <= off_grid");
  }
  CostField f(width, height, value, off_grid);
  f.table_.resize(static_cast<std::size_t>(width) * height * kNumControls);
  for (int cell = 0; cell < width * height; ++cell) {
    for (Control u : kAllControls) {
      const int x = cell % width + kDx[index_of(u)];
      const int y = cell / width + kDy[index_of(u)];
      f.table_[static_cast<std::size_t>(cell) * kNumControls + index_of(u)] =
          f.in_bounds(x, y) ? value : off_grid;
    }
  }
  return f;
}

void CostField::materialize() {
  if (!table_.empty()) return;
  std::vector<double> table(static_cast<std::size_t>(cells()) * kNumControls);
  for (int cell = 0; cell < cells(); ++cell) {
    for (Control u : kAllControls) {
      table[static_cast<std::size_t>(cell) * kNumControls + index_of(u)] = (*this)(cell, u);
    }
  }
  table_ = std::move(table);
}

void CostField::set(State x, Control u, double value) {
  if (!in_bounds(x.x, x.y)) throw std::out_of_range("CostField::set: state out of bounds");
  if (!(value > 0.0)) throw std::invalid_argument("CostField::set: costs must be positive");
  materialize();
  table_[static_cast<std::size_t>(x.y * width_ + x.x) * kNumControls + index_of(u)] = value;
  min_cost_ = std::min(min_cost_, value);
}

void CostField::write_csv(std::ostream& out) const {
  out << "x,y,control,cost\n";
  for (int cell = 0; cell < cells(); ++cell) {
    for (Control u : kAllControls) {
      out << cell % width_ << ',' << cell / width_ << ',' << control_name(u) << ','
          << (*this)(cell, u) << '\n';
    }
  }
}

}  // namespace navirl
