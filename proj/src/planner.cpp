#include "navirl/planner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

#include <json.hpp>

namespace navirl {

namespace {

struct HeapNode {
  double f;
  double g;
  int cell;
};

// priority_queue keeps the "largest" on top, so order is reversed.
struct HeapOrder {
  bool operator()(const HeapNode& a, const HeapNode& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    return a.cell > b.cell;
  }
};

void check_state(const CostField& cost, State s, const char* what) {
  if (!cost.in_bounds(s.x, s.y)) throw std::invalid_argument(std::string(what) + " out of bounds");
}

}  // namespace

void PlanTrace::write_jsonl(std::ostream& out) const {
  for (const auto& e : expansions) {
    nlohmann::json j{{"order", e.order}, {"x", e.state.x}, {"y", e.state.y}, {"g", e.g}};
    out << j.dump() << '\n';
  }
}

PlanResult astar_backward(const CostField& cost, State x_t, State goal, double eps_h,
                          PlanTrace* trace) {
  check_state(cost, x_t, "astar_backward: x_t");
  check_state(cost, goal, "astar_backward: goal");
  if (!(eps_h >= 1.0)) throw std::invalid_argument("astar_backward: eps_h must be >= 1");

  const int w = cost.width();
  const int h = cost.height();
  PlanResult plan;
  plan.width = w;
  plan.height = h;
  plan.start = x_t;
  plan.goal = goal;
  plan.g.assign(cost.cells(), kInf);
  plan.parent.assign(cost.cells(), -1);
  plan.status.assign(cost.cells(), NodeStatus::unseen);

  const int target = plan.index(x_t);
  const double h_scale = eps_h * cost.min_cost();
  auto heuristic = [&](int cell) {
    const int dx = std::abs(cell % w - x_t.x);
    const int dy = std::abs(cell / w - x_t.y);
    return h_scale * static_cast<double>(std::max(dx, dy));
  };

  std::priority_queue<HeapNode, std::vector<HeapNode>, HeapOrder> open;
  const int root = plan.index(goal);
  plan.g[root] = 0.0;
  plan.status[root] = NodeStatus::open;
  open.push({heuristic(root), 0.0, root});

  while (!open.empty()) {
    const HeapNode top = open.top();
    open.pop();
    if (plan.status[top.cell] == NodeStatus::closed || top.g > plan.g[top.cell]) continue;
    plan.status[top.cell] = NodeStatus::closed;
    if (trace) {
      trace->expansions.push_back(
          {static_cast<int>(plan.expansions), {top.cell % w, top.cell / w}, top.g});
    }
    ++plan.expansions;
    if (top.cell == target) {
      plan.reached = true;
      break;
    }
    const int sx = top.cell % w;
    const int sy = top.cell / w;
    // Predecessors: cells p with f(p, u) = s.
    for (int ui = 0; ui < kNumControls; ++ui) {
      const int px = sx - kDx[ui];
      const int py = sy - kDy[ui];
      if (px < 0 || py < 0 || px >= w || py >= h) continue;
      const int p = py * w + px;
      if (plan.status[p] == NodeStatus::closed) continue;
      const double candidate = cost(p, control_at(ui)) + top.g;
      if (candidate < plan.g[p]) {
        plan.g[p] = candidate;
        plan.parent[p] = static_cast<std::int8_t>(ui);
        plan.status[p] = NodeStatus::open;
        open.push({candidate + heuristic(p), candidate, p});
      }
    }
  }
  return plan;
}

DpResult dp_backward(const CostField& cost, State goal, int horizon) {
  check_state(cost, goal, "dp_backward: goal");
  if (horizon < 1) throw std::invalid_argument("dp_backward: horizon must be >= 1");
  const int w = cost.width();
  const int h = cost.height();
  const int n = cost.cells();
  const int root = goal.y * w + goal.x;
  DpResult dp;
  dp.width = w;
  dp.height = h;
  dp.value.assign(n, kInf);
  dp.best.assign(n, -1);
  dp.value[root] = 0.0;
  std::vector<double> next(n);
  for (int t = 0; t < horizon; ++t) {
    for (int cell = 0; cell < n; ++cell) {
      if (cell == root) {
        next[cell] = 0.0;
        continue;
      }
      const int x = cell % w;
      const int y = cell / w;
      double best = kInf;
      std::int8_t arg = -1;
      for (int ui = 0; ui < kNumControls; ++ui) {
        const int nx = x + kDx[ui];
        const int ny = y + kDy[ui];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const double v = dp.value[ny * w + nx];
        if (v == kInf) continue;
        const double q = cost(cell, control_at(ui)) + v;
        if (q < best) {
          best = q;
          arg = static_cast<std::int8_t>(ui);
        }
      }
      next[cell] = best;
      dp.best[cell] = arg;
    }
    dp.value.swap(next);
  }
  dp.backups = static_cast<long>(n) * horizon;
  return dp;
}

double g_cap(const CostField& cost) { return cost.large() * static_cast<double>(cost.cells()); }

QValues q_values(const PlanResult& plan, const CostField& cost, State x_t) {
  QValues q;
  if (!plan.reached) {
    q.fill(kInf);
    return q;
  }
  const double cap = g_cap(cost);
  for (Control u : kAllControls) {
    const int nx = x_t.x + kDx[index_of(u)];
    const int ny = x_t.y + kDy[index_of(u)];
    double& out = q[index_of(u)];
    if (!cost.in_bounds(nx, ny)) {
      out = cost.large() + cap;
      continue;
    }
    const double g = plan.g[ny * plan.width + nx];
    out = cost(x_t, u) + (g < kInf ? g : cap);
  }
  return q;
}

QValues q_values(const DpResult& dp, const CostField& cost, State x_t) {
  QValues q;
  const double cap = g_cap(cost);
  for (Control u : kAllControls) {
    const int nx = x_t.x + kDx[index_of(u)];
    const int ny = x_t.y + kDy[index_of(u)];
    double& out = q[index_of(u)];
    if (!cost.in_bounds(nx, ny)) {
      out = cost.large() + cap;
      continue;
    }
    const double v = dp.value[ny * dp.width + nx];
    out = cost(x_t, u) + (v < kInf ? v : cap);
  }
  return q;
}

Policy boltzmann_policy(const QValues& q) {
  Policy pi;
  const double qmin = *std::min_element(q.begin(), q.end());
  if (!std::isfinite(qmin)) {
    pi.fill(1.0 / kNumControls);
    return pi;
  }
  double z = 0.0;
  for (int i = 0; i < kNumControls; ++i) {
    pi[i] = std::isfinite(q[i]) ? std::exp(-(q[i] - qmin)) : 0.0;
    z += pi[i];
  }
  for (auto& p : pi) p /= z;
  return pi;
}

Control greedy_control(const Policy& pi) {
  int best = 0;
  for (int i = 1; i < kNumControls; ++i) {
    if (pi[i] > pi[best]) best = i;
  }
  return control_at(best);
}

Visitation visitation_subgradient(const PlanResult& plan, State x_t, Control u_t,
                                  GradientFlow flow) {
  Visitation mu;
  State s{x_t.x + kDx[index_of(u_t)], x_t.y + kDy[index_of(u_t)]};
  if (s.x < 0 || s.y < 0 || s.x >= plan.width || s.y >= plan.height) return mu;
  const NodeStatus st = plan.status[plan.index(s)];
  const bool usable = st == NodeStatus::closed ||
                      (flow == GradientFlow::closed_and_open && st == NodeStatus::open);
  if (!usable) return mu;
  mu.push_back({plan.index(x_t), u_t});
  const int limit = plan.width * plan.height;
  while (!(s == plan.goal)) {
    const std::int8_t p = plan.parent[plan.index(s)];
    if (p < 0 || static_cast<int>(mu.size()) > limit) {
      throw std::logic_error("visitation_subgradient: broken parent chain");
    }
    mu.push_back({plan.index(s), control_at(p)});
    s = {s.x + kDx[p], s.y + kDy[p]};
  }
  return mu;
}

Visitation visitation_subgradient(const DpResult& dp, State goal, State x_t, Control u_t) {
  Visitation mu;
  State s{x_t.x + kDx[index_of(u_t)], x_t.y + kDy[index_of(u_t)]};
  if (s.x < 0 || s.y < 0 || s.x >= dp.width || s.y >= dp.height) return mu;
  if (!(s == goal) && dp.best[s.y * dp.width + s.x] < 0) return mu;
  mu.push_back({x_t.y * dp.width + x_t.x, u_t});
  const int limit = dp.width * dp.height;
  while (!(s == goal)) {
    const std::int8_t b = dp.best[s.y * dp.width + s.x];
    if (b < 0 || static_cast<int>(mu.size()) > limit) {
      throw std::logic_error("visitation_subgradient: broken DP policy chain");
    }
    mu.push_back({s.y * dp.width + s.x, control_at(b)});
    s = {s.x + kDx[b], s.y + kDy[b]};
  }
  return mu;
}

double inner_product(const CostField& cost, const Visitation& mu) {
  double sum = 0.0;
  for (const auto& e : mu) sum += cost(e.cell, e.u);
  return sum;
}

}  // namespace navirl
