#include "navirl/eval.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "navirl/io.hpp"
#include "navirl/parallel.hpp"

namespace navirl {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
    case Outcome::unreachable: return "unreachable";
  }
  return "unknown";
}

RolloutResult rollout(const ThetaParams& theta, const GridMap& map, State start, State goal,
                      const RolloutConfig& cfg, std::uint64_t seed,
                      const RolloutObserver& observer) {
  if (!map.in_bounds(start) || !map.in_bounds(goal) || map.occupied(start) || map.occupied(goal)) {
    throw std::invalid_argument("rollout: start and goal must be free cells");
  }
  RolloutResult r;
  r.trajectory.push_back(start);
  const int oracle = oracle_cost_to_go(map, goal)[map.index(start)];
  r.oracle_steps = oracle;
  if (oracle == kUnreachable) {
    r.outcome = Outcome::unreachable;
    return r;
  }
  const long cap = static_cast<long>(cfg.step_cap_factor) * oracle;

  BeliefState h = cfg.full_information
                      ? belief_from_map(map, cfg.full_information_confidence)
                      : BeliefState(map.width(), map.height(), theta.sensor.h0);
  State x = start;
  for (int t = 0; !(x == goal); ++t) {
    if (r.steps >= cap) {
      r.outcome = Outcome::timeout;
      return r;
    }
    if (!cfg.full_information) {
      observe_and_update(h, x, observe(map, x, cfg.sensor, derive_seed(seed, t)), theta.sensor);
    }
    const CostField cost(h, theta.cost);
    const PlanResult plan = astar_backward(cost, x, goal, cfg.eps_h);
    ++r.plans;
    r.expansions += plan.expansions;
    if (!plan.reached) {
      r.outcome = Outcome::unreachable;
      return r;
    }
    const Policy pi = boltzmann_policy(q_values(plan, cost, x));
    const Control u = greedy_control(pi);
    if (observer) observer({t, x, u, &h, &plan, &pi});
    const auto next = step(map, x, u);
    ++r.steps;
    if (!next || map.occupied(*next)) {
      if (next) r.trajectory.push_back(*next);
      r.outcome = Outcome::collision;
      return r;
    }
    x = *next;
    r.trajectory.push_back(x);
  }
  r.outcome = Outcome::success;
  return r;
}

bool is_success(const RolloutResult& r, const GridMap& map, State goal) {
  if (r.trajectory.empty() || !(r.trajectory.back() == goal)) return false;
  for (auto s : r.trajectory) {
    if (!map.in_bounds(s) || map.occupied(s)) return false;
  }
  const int steps = static_cast<int>(r.trajectory.size()) - 1;
  return steps <= 2 * r.oracle_steps;
}

std::vector<Task> sample_tasks(const std::vector<GridMap>& maps, std::uint64_t seed,
                               int min_distance) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& map = maps[i];
    auto free = map.free_cells();
    if (free.size() < 2) throw std::invalid_argument("sample_tasks: map has < 2 free cells");
    std::mt19937_64 rng(derive_seed(seed, i));
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    bool found = false;
    for (int attempt = 0; attempt < 10000 && !found; ++attempt) {
      State s = free[pick(rng)];
      State g = free[pick(rng)];
      const int d = oracle_cost_to_go(map, g)[map.index(s)];
      if (d == kUnreachable || d < min_distance) continue;
      tasks.push_back({static_cast<int>(i), s, g});
      found = true;
    }
    if (!found) throw std::invalid_argument("sample_tasks: no valid start/goal on map " +
                                            std::to_string(i));
  }
  return tasks;
}

EvalReport evaluate(const ThetaParams& theta, const std::vector<GridMap>& maps,
                    const std::vector<Task>& tasks, const RolloutConfig& cfg, std::uint64_t seed,
                    unsigned threads) {
  if (tasks.empty()) throw std::invalid_argument("evaluate: empty test set");
  EvalReport rep;
  rep.rollouts.resize(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto& t = tasks[i];
    rep.rollouts[i] = rollout(theta, maps.at(t.map_index), t.start, t.goal, cfg, derive_seed(seed, i));
  });
  auto& m = rep.metrics;
  m.trials = static_cast<int>(tasks.size());
  int success = 0, collision = 0, timeout = 0, unreachable = 0;
  double diff = 0.0;
  long plans = 0;
  long expansions = 0;
  for (const auto& r : rep.rollouts) {
    plans += r.plans;
    expansions += r.expansions;
    switch (r.outcome) {
      case Outcome::success:
        ++success;
        diff += r.steps - r.oracle_steps;
        break;
      case Outcome::collision: ++collision; break;
      case Outcome::timeout: ++timeout; break;
      case Outcome::unreachable: ++unreachable; break;
    }
  }
  const double n = static_cast<double>(m.trials);
  m.success_rate = 100.0 * success / n;
  m.collision_rate = 100.0 * collision / n;
  m.timeout_rate = 100.0 * timeout / n;
  m.unreachable_rate = 100.0 * unreachable / n;
  m.traj_diff = success > 0 ? diff / success : 0.0;
  m.plans_per_rollout = plans / n;
  m.mean_expansions = plans > 0 ? static_cast<double>(expansions) / plans : 0.0;
  return rep;
}

void write_eval_csv(std::ostream& out, const EvalMetrics& m) {
  out << "trials,success_rate,traj_diff,collision_rate,timeout_rate,unreachable_rate,"
         "plans_per_rollout,mean_expansions\n";
  out.precision(10);
  out << m.trials << ',' << m.success_rate << ',' << m.traj_diff << ',' << m.collision_rate << ','
      << m.timeout_rate << ',' << m.unreachable_rate << ',' << m.plans_per_rollout << ','
      << m.mean_expansions << '\n';
}

void write_rollouts_jsonl(std::ostream& out, const std::vector<RolloutResult>& rollouts) {
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const auto& r = rollouts[i];
    nlohmann::json traj = nlohmann::json::array();
    for (auto s : r.trajectory) traj.push_back({s.x, s.y});
    nlohmann::json j{{"trial", i},
                     {"outcome", std::string(outcome_name(r.outcome))},
                     {"steps", r.steps},
                     {"oracle_steps", r.oracle_steps},
                     {"plans", r.plans},
                     {"expansions", r.expansions},
                     {"trajectory", traj}};
    out << j.dump() << '\n';
  }
}

GridMap dyna_map(const DynaConfig& cfg, int door_column) {
  GridMap map(cfg.width, cfg.height);
  for (int x = 0; x < cfg.width; ++x) {
    if (x != door_column) map.set({x, cfg.wall_row}, GridMap::kOccupied);
  }
  return map;
}

ThetaParams dyna_theta(const DynaConfig& cfg, const CostEncoderParams& cost) {
  ThetaParams t;
  t.sensor.psi.assign(static_cast<std::size_t>(cfg.sensor.beams), cfg.psi);
  t.sensor.h0 = cfg.h0;
  t.sensor.epsilon = cfg.epsilon;
  t.cost = cost;
  return t;
}

DynaResult dyna_blocking_maze(const ThetaParams& theta, const DynaConfig& cfg) {
  if (cfg.wall_row <= 0 || cfg.wall_row >= cfg.height - 1) {
    throw std::invalid_argument("dyna: wall row must split the map");
  }
  const GridMap phase1 = dyna_map(cfg, cfg.first_door);
  const GridMap phase2 = dyna_map(cfg, cfg.second_door);
  DynaResult result;
  result.phase1_length = oracle_cost_to_go(phase1, cfg.goal)[phase1.index(cfg.start)];
  result.phase2_length = oracle_cost_to_go(phase2, cfg.goal)[phase2.index(cfg.start)];
  if (result.phase1_length == kUnreachable || result.phase2_length == kUnreachable) {
    throw std::invalid_argument("dyna: goal unreachable in one of the phases");
  }

  BeliefState h(cfg.width, cfg.height, theta.sensor.h0);
  const GridMap* map = &phase1;
  int phase = 1;
  long env_step = 0;
  int completed = 0;
  while (env_step < cfg.total_steps) {
    // The door moves between episodes; the agent is not told.
    if (phase == 1 && env_step >= cfg.switch_step) {
      phase = 2;
      map = &phase2;
      h.decay_towards(theta.sensor.h0, cfg.phase_retention);
      result.first_phase2_episode = static_cast<int>(result.episodes.size());
    }
    DynaEpisode ep;
    ep.index = static_cast<int>(result.episodes.size());
    ep.phase = phase;
    ep.start_step = env_step;
    State x = cfg.start;
    while (!(x == cfg.goal) && ep.length < cfg.episode_step_cap && env_step < cfg.total_steps) {
      h.decay_towards(theta.sensor.h0, cfg.gamma_step);
      observe_and_update(h, x, observe(*map, x, cfg.sensor, derive_seed(cfg.seed, env_step)),
                         theta.sensor);
      const CostField cost(h, theta.cost);
      const PlanResult plan = astar_backward(cost, x, cfg.goal, cfg.eps_h);
      const Control u = greedy_control(boltzmann_policy(q_values(plan, cost, x)));
      const auto next = step(*map, x, u);
      // Blocked moves leave the robot in place.
      if (next && map->free(*next)) x = *next;
      if (x.y == cfg.wall_row) ep.door_column = x.x;
      ++ep.length;
      ++env_step;
      if (x == cfg.goal) {
        ep.completed = true;
        ++completed;
      }
      result.curve.emplace_back(env_step, completed);
    }
    result.episodes.push_back(ep);
  }
  return result;
}

void write_dyna_csv(std::ostream& out, const DynaResult& r) {
  out << "env_step,episodes_completed\n";
  for (const auto& [s, e] : r.curve) out << s << ',' << e << '\n';
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GridMap corner_map(const BenchConfig& cfg, int size) {
  const State start{0, 0};
  const State goal{size - 1, size - 1};
  for (std::uint64_t redraw = 0;; ++redraw) {
    auto map = generate_map(derive_seed(derive_seed(cfg.seed, size), redraw), size, size,
                            cfg.obstacle_density);
    map.set(start, GridMap::kFree);
    map.set(goal, GridMap::kFree);
    if (oracle_cost_to_go(map, goal)[map.index(start)] != kUnreachable) return map;
    if (redraw > 1000) throw std::runtime_error("bench: cannot draw a connected map");
  }
}

}  // namespace

BenchReport bench_planner(const BenchConfig& cfg, PlanTrace* trace) {
  if (cfg.sizes.empty()) throw std::invalid_argument("bench: no sizes requested");
  if (cfg.reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  using clock = std::chrono::steady_clock;
  BenchReport report;
  for (int size : cfg.sizes) {
    const GridMap map = corner_map(cfg, size);
    const BeliefState h = belief_from_map(map, cfg.belief_confidence);
    const CostField cost(h, cfg.cost);
    const State x_t{0, 0};
    const State goal{size - 1, size - 1};
    const int horizon = 2 * size;

    BenchRow row;
    row.size = size;
    std::vector<double> astar_ms, dp_ms;
    for (int r = 0; r < cfg.reps; ++r) {
      auto t0 = clock::now();
      const auto plan = astar_backward(cost, x_t, goal, 1.0, r == 0 ? trace : nullptr);
      auto t1 = clock::now();
      astar_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      row.astar_expansions = plan.expansions;
      row.astar_cost = plan.g_at(x_t);
    }
    for (int r = 0; r < cfg.reps; ++r) {
      auto t0 = clock::now();
      const auto dp = dp_backward(cost, goal, horizon);
      auto t1 = clock::now();
      dp_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      row.dp_backups = dp.backups;
      row.dp_cost = dp.value[map.index(x_t)];
    }
    row.astar_ms = median(astar_ms);
    row.dp_ms = median(dp_ms);
    row.expansion_ratio = static_cast<double>(row.dp_backups) / static_cast<double>(row.astar_expansions);
    row.time_ratio = row.astar_ms > 0 ? row.dp_ms / row.astar_ms : 0.0;
    report.rows.push_back(row);
  }
  return report;
}

void write_bench_csv(std::ostream& out, const BenchReport& r, bool include_timing) {
  out << "size,astar_expansions,dp_backups,expansion_ratio,astar_cost,dp_cost";
  if (include_timing) out << ",astar_ms,dp_ms,time_ratio";
  out << '\n';
  out.precision(10);
  for (const auto& row : r.rows) {
    out << row.size << ',' << row.astar_expansions << ',' << row.dp_backups << ','
        << row.expansion_ratio << ',' << row.astar_cost << ',' << row.dp_cost;
    if (include_timing) out << ',' << row.astar_ms << ',' << row.dp_ms << ',' << row.time_ratio;
    out << '\n';
  }
}

}  // namespace navirl
