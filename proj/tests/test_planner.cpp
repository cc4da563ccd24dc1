#include <doctest.h>

#include <cmath>
#include <sstream>

#include "navirl/planner.hpp"
#include "oracles.hpp"

using namespace navirl;

namespace {

BeliefState random_belief(std::mt19937_64& rng, int w, int h, double spread) {
  std::normal_distribution<double> n(0.0, spread);
  BeliefState b(w, h, 0.0);
  for (int j = 0; j < b.size(); ++j) b[j] = n(rng);
  return b;
}

State random_state(std::mt19937_64& rng, int w, int h) {
  return {static_cast<int>(rng() % w), static_cast<int>(rng() % h)};
}

}  // namespace

TEST_CASE("closed g-values equal the exact cost-to-go; open ones bound it from above") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 25; ++trial) {
    const int w = 4 + trial % 6, h = 3 + trial % 5;
    const auto b = random_belief(rng, w, h, 3.0);
    const CostField c(b, {1.0, 100.0});
    const State goal = random_state(rng, w, h), xt = random_state(rng, w, h);
    const auto plan = astar_backward(c, xt, goal);
    const auto v = oracle::cost_to_go(c, goal);
    REQUIRE(plan.reached);
    CHECK(plan.g_at(xt) == doctest::Approx(v[plan.index(xt)]).epsilon(1e-9));
    for (int i = 0; i < w * h; ++i) {
      if (plan.status[i] == NodeStatus::closed) CHECK(plan.g[i] == doctest::Approx(v[i]).epsilon(1e-9));
      if (plan.status[i] == NodeStatus::open) CHECK(plan.g[i] >= v[i] - 1e-9);
      if (plan.status[i] == NodeStatus::unseen) CHECK(plan.g[i] == kInf);
    }
    CHECK(plan.expansions <= w * h);
  }
}

TEST_CASE("an inflated heuristic stays within its suboptimality bound") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = random_belief(rng, 10, 10, 3.0);
    const CostField c(b, {1.0, 50.0});
    const State goal = random_state(rng, 10, 10), xt = random_state(rng, 10, 10);
    const double best = astar_backward(c, xt, goal, 1.0).g_at(xt);
    for (double e : {1.5, 3.0}) {
      const auto p = astar_backward(c, xt, goal, e);
      CHECK(p.g_at(xt) >= best - 1e-9);
      CHECK(p.g_at(xt) <= e * best + 1e-9);
    }
  }
}

TEST_CASE("start at the goal and an empty lattice") {
  const auto c = CostField::uniform(6, 6, 1.0, 10.0);
  const auto p = astar_backward(c, {2, 2}, {2, 2});
  CHECK(p.reached);
  CHECK(p.g_at({2, 2}) == 0.0);
  CHECK(p.expansions == 1);
  const auto q = astar_backward(c, {0, 0}, {5, 3});
  CHECK(q.g_at({0, 0}) == doctest::Approx(5.0));
  // With a perfect heuristic only states on an optimal path are expanded.
  CHECK(q.expansions < 36);
}

TEST_CASE("tie-breaking and the parent chain are deterministic") {
  const auto c = CostField::uniform(7, 7, 1.0, 10.0);
  const auto a = astar_backward(c, {0, 0}, {6, 6});
  const auto b = astar_backward(c, {0, 0}, {6, 6});
  CHECK(a.g == b.g);
  CHECK(a.parent == b.parent);
  CHECK(a.expansions == b.expansions);
  PlanTrace trace;
  const auto t = astar_backward(c, {0, 0}, {6, 6}, 1.0, &trace);
  CHECK(static_cast<long>(trace.expansions.size()) == t.expansions);
  CHECK(trace.expansions.front().state == State{6, 6});
  std::ostringstream out;
  trace.write_jsonl(out);
  CHECK(!out.str().empty());
}

TEST_CASE("dynamic programming converges to the same values") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 5 + trial % 4, h = 4 + trial % 3;
    const auto b = random_belief(rng, w, h, 3.0);
    const CostField c(b, {1.0, 100.0});
    const State goal = random_state(rng, w, h);
    const auto v = oracle::cost_to_go(c, goal);
    const auto dp = dp_backward(c, goal, w * h);
    CHECK(dp.backups == static_cast<long>(w) * h * w * h);
    for (int i = 0; i < w * h; ++i) CHECK(dp.value[i] == doctest::Approx(v[i]).epsilon(1e-9));

    std::vector<double> prev(w * h, kInf);
    for (int T = 1; T <= w + h; ++T) {
      const auto d = dp_backward(c, goal, T);
      for (int i = 0; i < w * h; ++i) CHECK(d.value[i] <= prev[i]);
      prev = d.value;
    }
  }
}

TEST_CASE("softmin policy") {
  QValues q;
  q.fill(1.0);
  q[0] = 0.0;
  const auto pi = boltzmann_policy(q);
  const double z = 1.0 + 7.0 * std::exp(-1.0);
  CHECK(pi[0] == doctest::Approx(1.0 / z).epsilon(1e-12));
  CHECK(pi[0] == doctest::Approx(0.279708).epsilon(1e-5));
  CHECK(-std::log(pi[0]) == doctest::Approx(1.27401).epsilon(1e-5));
  double sum = 0.0;
  for (double p : pi) sum += p;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(greedy_control(pi) == Control::N);

  QValues shifted = q;
  for (auto& v : shifted) v += 1e6;
  const auto ps = boltzmann_policy(shifted);
  for (int i = 0; i < kNumControls; ++i) CHECK(ps[i] == doctest::Approx(pi[i]).epsilon(1e-9));

  QValues inf;
  inf.fill(kInf);
  for (double p : boltzmann_policy(inf)) CHECK(p == 0.125);
  inf[3] = 2.0;
  CHECK(boltzmann_policy(inf)[3] == 1.0);

  Policy tie{};
  tie[2] = tie[5] = 0.5;
  CHECK(greedy_control(tie) == Control::E);
}

TEST_CASE("visitation inner product equals Q and its cost slope is one per visit") {
  std::mt19937_64 rng(4);
  int probes = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const auto b = random_belief(rng, 8, 8, 3.0);
    CostField c(b, {1.0, 100.0});
    const State goal = random_state(rng, 8, 8), xt = random_state(rng, 8, 8);
    if (xt == goal) continue;
    const auto plan = astar_backward(c, xt, goal);
    const auto q = q_values(plan, c, xt);
    for (auto u : kAllControls) {
      const auto mu = visitation_subgradient(plan, xt, u, GradientFlow::closed_and_open);
      if (mu.empty()) continue;
      ++probes;
      CHECK(inner_product(c, mu) == doctest::Approx(q[index_of(u)]).epsilon(1e-9));
    }
    const Control u = greedy_control(boltzmann_policy(q));
    const auto mu = visitation_subgradient(plan, xt, u);
    REQUIRE(!mu.empty());
    const auto e = mu.back();
    const State at{e.cell % 8, e.cell / 8};
    const double delta = 1e-4;
    c.set(at, e.u, c(e.cell, e.u) + delta);
    const auto plan2 = astar_backward(c, xt, goal);
    const auto q2 = q_values(plan2, c, xt);
    CHECK(q2[index_of(u)] - q[index_of(u)] == doctest::Approx(delta).epsilon(1e-6));
  }
  CHECK(probes > 50);
}

TEST_CASE("unreached successors and off-map moves use the cap") {
  const auto c = CostField::uniform(5, 5, 1.0, 10.0);
  CHECK(g_cap(c) == 250.0);
  const auto plan = astar_backward(c, {0, 0}, {1, 1});
  const auto q = q_values(plan, c, {0, 0});
  CHECK(q[index_of(Control::N)] == 10.0 + 250.0);
  CHECK(q[index_of(Control::SE)] == 1.0);
  CHECK(visitation_subgradient(plan, {0, 0}, Control::W).empty());

  const auto dp = dp_backward(c, {1, 1}, 10);
  const auto qd = q_values(dp, c, {0, 0});
  CHECK(qd[index_of(Control::SE)] == 1.0);
  CHECK(qd[index_of(Control::W)] == 260.0);
  const auto mu = visitation_subgradient(dp, {1, 1}, {0, 0}, Control::E);
  CHECK(inner_product(c, mu) == doctest::Approx(qd[index_of(Control::E)]));
}

TEST_CASE("A* expands far fewer states than DP backs up on open maps") {
  for (int n : {16, 32}) {
    const auto c = CostField::uniform(n, n, 1.0, 10.0);
    const auto p = astar_backward(c, {0, 0}, {n - 1, n - 1});
    const auto d = dp_backward(c, {n - 1, n - 1}, 2 * n);
    CHECK(d.backups == static_cast<long>(n) * n * 2 * n);
    CHECK(d.backups > 5 * p.expansions);
    CHECK(d.value[0] == doctest::Approx(p.g_at({0, 0})));
  }
}
