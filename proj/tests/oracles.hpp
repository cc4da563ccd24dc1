#pragma once

// Reference implementations kept deliberately naive and separate from the
// library code they check.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "navirl/cost.hpp"
#include "navirl/grid.hpp"

namespace oracle {

using navirl::GridMap;
using navirl::State;

// Plain BFS over the 8-neighbourhood, -1 for unreachable or occupied.
inline std::vector<int> bfs_steps(const GridMap& map, State goal) {
  std::vector<int> d(map.size(), -1);
  if (!map.free(goal)) return d;
  std::deque<State> q{goal};
  d[map.index(goal)] = 0;
  while (!q.empty()) {
    const State s = q.front();
    q.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        const State n{s.x + dx, s.y + dy};
        if (!map.in_bounds(n) || !map.free(n) || d[map.index(n)] >= 0) continue;
        d[map.index(n)] = d[map.index(s)] + 1;
        q.push_back(n);
      }
    }
  }
  return d;
}

// Bellman-Ford style relaxation of V(x) = min_u c(x,u) + V(f(x,u)) over
// in-bounds successors until nothing changes.
inline std::vector<double> cost_to_go(const navirl::CostField& c, State goal) {
  const int w = c.width(), h = c.height();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v(w * h, inf);
  v[goal.y * w + goal.x] = 0.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < w * h; ++i) {
      const State s{i % w, i / w};
      if (s == goal) continue;
      for (auto u : navirl::kAllControls) {
        const State n{s.x + navirl::kDx[navirl::index_of(u)], s.y + navirl::kDy[navirl::index_of(u)]};
        if (n.x < 0 || n.y < 0 || n.x >= w || n.y >= h) continue;
        const double cand = c(s, u) + v[n.y * w + n.x];
        if (cand < v[i] - 1e-12 * std::max(1.0, std::abs(cand))) {
          v[i] = cand;
          changed = true;
        }
      }
    }
  }
  return v;
}

// Textbook Dijkstra on the reversed graph: the predecessor y of x is any
// in-bounds cell with a move u such that f(y, u) = x.
inline std::vector<double> dijkstra(const navirl::CostField& c, State goal) {
  const int w = c.width(), h = c.height();
  std::vector<double> v(w * h, std::numeric_limits<double>::infinity());
  std::vector<bool> done(w * h, false);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  v[goal.y * w + goal.x] = 0.0;
  pq.push({0.0, goal.y * w + goal.x});
  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (done[i]) continue;
    done[i] = true;
    const int x = i % w, y = i / w;
    for (auto u : navirl::kAllControls) {
      const int px = x - navirl::kDx[navirl::index_of(u)], py = y - navirl::kDy[navirl::index_of(u)];
      if (px < 0 || py < 0 || px >= w || py >= h) continue;
      const int j = py * w + px;
      const double cand = d + c(j, u);
      if (cand < v[j]) {
        v[j] = cand;
        pq.push({cand, j});
      }
    }
  }
  return v;
}

// Distance along a ray from (ox, oy) with direction (dx, dy) to the first
// occupied unit box, slab test per box. A hit needs a positive-length chord;
// corner grazes do not count. Returns max_range when nothing is hit or the ray
// leaves the map first.
inline double ray_range(const GridMap& map, double ox, double oy, double dx, double dy,
                        double max_range) {
  double best = max_range;
  for (int i = 0; i < map.size(); ++i) {
    const State s = map.state_at(i);
    if (!map.occupied(s)) continue;
    double t0 = 0.0, t1 = max_range;
    auto slab = [&](double o, double d, double lo, double hi) {
      if (std::abs(d) < 1e-15) return o > lo && o < hi;
      double a = (lo - o) / d, b = (hi - o) / d;
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
      return true;
    };
    if (!slab(ox, dx, s.x, s.x + 1.0)) continue;
    if (!slab(oy, dy, s.y, s.y + 1.0)) continue;
    if (t1 - t0 > 1e-9 && t0 < best) best = t0;
  }
  // Leaving the map before any hit counts as no return.
  const double bx = dx > 0 ? (map.width() - ox) / dx : dx < 0 ? -ox / dx : 1e300;
  const double by = dy > 0 ? (map.height() - oy) / dy : dy < 0 ? -oy / dy : 1e300;
  if (std::min(bx, by) < best) return max_range;
  return best;
}

inline GridMap random_map(std::mt19937_64& rng, int w, int h, double density) {
  std::bernoulli_distribution occ(density);
  GridMap m(w, h);
  for (int i = 0; i < m.size(); ++i) m.set(m.state_at(i), occ(rng) ? GridMap::kOccupied : GridMap::kFree);
  return m;
}

}  // namespace oracle
