#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "navirl/cost.hpp"
#include "navirl/grid.hpp"

namespace navirl {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class NodeStatus : std::uint8_t { unseen, open, closed };

// Result of one backward A* search rooted at the goal. g is exact for closed
// states and an upper bound (the cost of the parent chain) for open ones.
struct PlanResult {
  int width = 0;
  int height = 0;
  State start;  // the query state x_t
  State goal;
  std::vector<double> g;
  std::vector<std::int8_t> parent;  // control leading one step towards the goal, -1 if none
  std::vector<NodeStatus> status;
  long expansions = 0;
  bool reached = false;  // x_t entered CLOSED

  int index(State s) const { return s.y * width + s.x; }
  bool closed(State s) const { return status[index(s)] == NodeStatus::closed; }
  bool open(State s) const { return status[index(s)] == NodeStatus::open; }
  bool visited(State s) const { return status[index(s)] != NodeStatus::unseen; }
  double g_at(State s) const { return g[index(s)]; }
};

struct TraceEntry {
  int order = 0;
  State state;
  double g = 0.0;
};

// Expansion order and g-values of one search.
struct PlanTrace {
  std::vector<TraceEntry> expansions;
  void write_jsonl(std::ostream& out) const;
};

// Backward A* from `goal` that stops once `x_t` is expanded. The heuristic
// is eps_h * min_cost * chebyshev(x, x_t); ties on f go to the smaller g, then
// the smaller row-major index.
PlanResult astar_backward(const CostField& cost, State x_t, State goal, double eps_h = 1.0,
                          PlanTrace* trace = nullptr);

struct DpResult {
  int width = 0;
  int height = 0;
  std::vector<double> value;
  std::vector<std::int8_t> best;  // argmin control, -1 where the value is infinite
  long backups = 0;
};

// T synchronous Bellman sweeps over every state with V(goal) clamped to 0.
DpResult dp_backward(const CostField& cost, State goal, int horizon);

using QValues = std::array<double, kNumControls>;
using Policy = std::array<double, kNumControls>;

// Finite stand-in for the cost-to-go of successors the search never reached.
double g_cap(const CostField& cost);

QValues q_values(const PlanResult& plan, const CostField& cost, State x_t);
QValues q_values(const DpResult& dp, const CostField& cost, State x_t);

// Softmin over Q, shifted by the minimum. Falls back to uniform when every
// entry is infinite.
Policy boltzmann_policy(const QValues& q);

// Greedy control: argmax of the policy, first in control order on ties.
Control greedy_control(const Policy& pi);

struct VisitedEdge {
  int cell = 0;
  Control u = Control::N;
  friend bool operator==(const VisitedEdge&, const VisitedEdge&) = default;
};
using Visitation = std::vector<VisitedEdge>;

enum class GradientFlow { closed_only, closed_and_open };

// (x_t, u_t) followed by the parent chain from f(x_t, u_t) to the goal. Empty
// when the successor is off-map or has no usable g.
Visitation visitation_subgradient(const PlanResult& plan, State x_t, Control u_t,
                                  GradientFlow flow = GradientFlow::closed_only);
Visitation visitation_subgradient(const DpResult& dp, State goal, State x_t, Control u_t);

double inner_product(const CostField& cost, const Visitation& mu);

}  // namespace navirl
