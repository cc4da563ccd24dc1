#include <doctest.h>

#include <sstream>

#include "navirl/eval.hpp"
#include "oracles.hpp"

using namespace navirl;

namespace {

ThetaParams default_theta() {
  ThetaParams t;
  t.sensor.psi.assign(72, 1.0);
  return t;
}

RolloutConfig quiet() {
  RolloutConfig c;
  c.sensor = {72, 2.5, 0.0};
  return c;
}

}  // namespace

TEST_CASE("a rollout that starts at the goal succeeds immediately") {
  GridMap m(5, 5);
  const auto r = rollout(default_theta(), m, {2, 2}, {2, 2}, quiet(), 1);
  CHECK(r.outcome == Outcome::success);
  CHECK(r.steps == 0);
  CHECK(is_success(r, m, {2, 2}));
  CHECK_THROWS(rollout(default_theta(), m, {5, 2}, {2, 2}, quiet(), 1));
}

TEST_CASE("a straight corridor is driven optimally") {
  GridMap m(9, 3);
  for (int x = 0; x < 9; ++x) {
    m.set({x, 0}, GridMap::kOccupied);
    m.set({x, 2}, GridMap::kOccupied);
  }
  const auto r = rollout(default_theta(), m, {0, 1}, {8, 1}, quiet(), 1);
  CHECK(r.outcome == Outcome::success);
  CHECK(r.steps == 8);
  CHECK(r.oracle_steps == 8);
  CHECK(r.plans == 8);
}

TEST_CASE("full information walks an optimal detour around a U") {
  // The goal sits inside a cup that opens to the south.
  GridMap m(9, 9);
  for (int x = 2; x <= 6; ++x) m.set({x, 2}, GridMap::kOccupied);
  for (int y = 2; y <= 5; ++y) {
    m.set({2, y}, GridMap::kOccupied);
    m.set({6, y}, GridMap::kOccupied);
  }
  RolloutConfig c = quiet();
  c.full_information = true;
  const auto r = rollout(default_theta(), m, {4, 0}, {4, 3}, c, 1);
  CHECK(r.outcome == Outcome::success);
  CHECK(r.steps == oracle::bfs_steps(m, {4, 3})[m.index({4, 0})]);
  CHECK(r.steps == r.oracle_steps);
}

TEST_CASE("success is recomputed from the trajectory") {
  GridMap m(4, 4);
  m.set({1, 1}, GridMap::kOccupied);
  RolloutResult r;
  r.oracle_steps = 2;
  r.trajectory = {{0, 0}, {1, 0}, {2, 0}};
  CHECK(is_success(r, m, {2, 0}));
  r.trajectory = {{0, 0}, {1, 1}, {2, 0}};
  CHECK_FALSE(is_success(r, m, {2, 0}));
  r.trajectory = {{0, 0}, {0, 1}, {0, 0}, {0, 1}, {0, 0}, {1, 0}, {2, 0}};
  CHECK_FALSE(is_success(r, m, {2, 0}));
  r.trajectory = {{0, 0}, {1, 0}};
  CHECK_FALSE(is_success(r, m, {2, 0}));
}

TEST_CASE("evaluation metrics are consistent and seed-deterministic") {
  std::vector<GridMap> maps;
  for (int i = 0; i < 12; ++i) maps.push_back(generate_map(100 + i, 12, 12, 0.2));
  const auto tasks = sample_tasks(maps, 4, 4);
  REQUIRE(tasks.size() == maps.size());
  RolloutConfig c = quiet();
  c.sensor.noise_sigma = 0.05;
  const auto a = evaluate(default_theta(), maps, tasks, c, 7, 1);
  const auto b = evaluate(default_theta(), maps, tasks, c, 7, 3);
  const auto& m = a.metrics;
  CHECK(m.trials == 12);
  CHECK(m.success_rate + m.collision_rate + m.timeout_rate + m.unreachable_rate ==
        doctest::Approx(100.0));
  CHECK(m.success_rate == b.metrics.success_rate);
  CHECK(m.traj_diff == b.metrics.traj_diff);
  for (std::size_t i = 0; i < a.rollouts.size(); ++i) {
    CHECK(a.rollouts[i].trajectory == b.rollouts[i].trajectory);
    const auto& r = a.rollouts[i];
    CHECK((r.outcome == Outcome::success) == is_success(r, maps[tasks[i].map_index], tasks[i].goal));
  }
  std::ostringstream csv, jsonl;
  write_eval_csv(csv, m);
  write_rollouts_jsonl(jsonl, a.rollouts);
  CHECK(csv.str().rfind("trials,success_rate,traj_diff", 0) == 0);

  c.full_information = true;
  const auto full = evaluate(default_theta(), maps, tasks, c, 7, 1);
  CHECK(full.metrics.success_rate == 100.0);
  CHECK(full.metrics.traj_diff == 0.0);
}

TEST_CASE("blocking maze: the robot adapts to the moved door") {
  const DynaConfig cfg;
  const auto r = dyna_blocking_maze(dyna_theta(cfg), cfg);
  REQUIRE(r.first_phase2_episode > 0);
  CHECK(r.phase1_length == 8);
  CHECK(r.phase2_length == 8);
  for (std::size_t i = 1; i < r.curve.size(); ++i) {
    CHECK(r.curve[i].first > r.curve[i - 1].first);
    CHECK(r.curve[i].second >= r.curve[i - 1].second);
  }
  const auto& before = r.episodes[r.first_phase2_episode - 1];
  CHECK(before.completed);
  CHECK(before.door_column == cfg.first_door);
  CHECK(before.length == r.phase1_length);
  bool adapted = false;
  for (int i = r.first_phase2_episode; i < static_cast<int>(r.episodes.size()) &&
                                       i < r.first_phase2_episode + 20; ++i) {
    adapted = adapted || (r.episodes[i].completed && r.episodes[i].door_column == cfg.second_door);
  }
  CHECK(adapted);

  const GridMap m = dyna_map(cfg, 3);
  CHECK(m.free({3, cfg.wall_row}));
  CHECK(m.occupied({4, cfg.wall_row}));
  std::ostringstream csv;
  write_dyna_csv(csv, r);
  CHECK(!csv.str().empty());
}

TEST_CASE("planner benchmark counts") {
  BenchConfig cfg;
  cfg.sizes = {16, 24};
  cfg.reps = 2;
  const auto a = bench_planner(cfg);
  const auto b = bench_planner(cfg);
  REQUIRE(a.rows.size() == 2);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& r = a.rows[i];
    CHECK(r.astar_expansions == b.rows[i].astar_expansions);
    CHECK(r.dp_backups == static_cast<long>(r.size) * r.size * 2 * r.size);
    CHECK(r.astar_expansions <= r.size * r.size);
    CHECK(r.astar_cost == doctest::Approx(r.dp_cost).epsilon(1e-9));
  }
  std::ostringstream counts;
  write_bench_csv(counts, a, false);
  std::ostringstream again;
  write_bench_csv(again, b, false);
  CHECK(counts.str() == again.str());
}
