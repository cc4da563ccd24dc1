#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "navirl/belief.hpp"
#include "navirl/grid.hpp"
#include "navirl/planner.hpp"
#include "navirl/sensor.hpp"
#include "navirl/trainer.hpp"

namespace navirl {

enum class Outcome { success, collision, timeout, unreachable };
std::string_view outcome_name(Outcome o);

struct RolloutResult {
  std::vector<State> trajectory;
  Outcome outcome = Outcome::success;
  int steps = 0;
  int oracle_steps = 0;
  int plans = 0;
  long expansions = 0;
};

struct RolloutConfig {
  LidarConfig sensor;
  double eps_h = 1.0;
  // Skip sensing and plan on log-odds pinned to the true map.
  bool full_information = false;
  double full_information_confidence = 50.0;
  // Step cap as a multiple of the oracle step count.
  int step_cap_factor = 2;
};

// Per-step snapshot handed to an optional observer (traces, figure dumps).
struct RolloutStep {
  int t = 0;
  State x;
  Control u = Control::N;
  const BeliefState* belief = nullptr;
  const PlanResult* plan = nullptr;
  const Policy* pi = nullptr;
};
using RolloutObserver = std::function<void(const RolloutStep&)>;

// observe -> update belief -> cost -> plan -> greedy control, until the goal,
// a collision, the step cap, or an unreachable plan. The true map is used only
// for sensing and collision checks.
RolloutResult rollout(const ThetaParams& theta, const GridMap& map, State start, State goal,
                      const RolloutConfig& cfg, std::uint64_t seed,
                      const RolloutObserver& observer = {});

// Recomputes the success rule from the trajectory alone.
bool is_success(const RolloutResult& r, const GridMap& map, State goal);

struct Task {
  int map_index = 0;
  State start;
  State goal;
};

// One seeded start/goal pair per map with oracle distance >= min_distance.
std::vector<Task> sample_tasks(const std::vector<GridMap>& maps, std::uint64_t seed,
                               int min_distance);

struct EvalMetrics {
  int trials = 0;
  double success_rate = 0.0;  // percent
  double traj_diff = 0.0;     // mean (steps - oracle_steps) over successes
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  double unreachable_rate = 0.0;
  double plans_per_rollout = 0.0;
  double mean_expansions = 0.0;  // per plan
};

struct EvalReport {
  EvalMetrics metrics;
  std::vector<RolloutResult> rollouts;
};

EvalReport evaluate(const ThetaParams& theta, const std::vector<GridMap>& maps,
                    const std::vector<Task>& tasks, const RolloutConfig& cfg, std::uint64_t seed,
                    unsigned threads = 0);

void write_eval_csv(std::ostream& out, const EvalMetrics& m);
void write_rollouts_jsonl(std::ostream& out, const std::vector<RolloutResult>& rollouts);

// Two-phase blocking maze: a wall row split the map with one door that moves
// from one side to the other after `switch_step` environment steps.
struct DynaConfig {
  int width = 9;
  int height = 6;
  int wall_row = 3;
  State start{4, 5};
  State goal{4, 0};
  int first_door = 8;
  int second_door = 0;
  long switch_step = 1000;
  long total_steps = 3000;
  LidarConfig sensor{72, 2.5, 0.0};
  double gamma_step = 0.99;        // per-step decay of log-odds towards the prior
  double phase_retention = 1.0;    // extra decay applied once at the switch
  int episode_step_cap = 200;
  double eps_h = 1.0;
  std::uint64_t seed = 1;
  // Sensor model used when no trained parameters are supplied.
  double psi = 5.0;
  double h0 = -1.0;
  double epsilon = 0.75;
};

GridMap dyna_map(const DynaConfig& cfg, int door_column);

struct DynaEpisode {
  int index = 0;
  int phase = 1;
  long start_step = 0;
  int length = 0;
  bool completed = false;
  int door_column = -1;  // door cell crossed, -1 if none
};

struct DynaResult {
  std::vector<std::pair<long, int>> curve;  // (env_step, episodes_completed)
  std::vector<DynaEpisode> episodes;
  int first_phase2_episode = -1;
  int phase1_length = 0;  // oracle episode length before the switch
  int phase2_length = 0;
};

// Per-beam psi, prior and band from cfg; cost encoder from `cost`.
ThetaParams dyna_theta(const DynaConfig& cfg, const CostEncoderParams& cost = {});

DynaResult dyna_blocking_maze(const ThetaParams& theta, const DynaConfig& cfg);
void write_dyna_csv(std::ostream& out, const DynaResult& r);

struct BenchRow {
  int size = 0;
  long astar_expansions = 0;
  long dp_backups = 0;
  double astar_ms = 0.0;
  double dp_ms = 0.0;
  double expansion_ratio = 0.0;  // dp_backups / astar_expansions
  double time_ratio = 0.0;       // dp_ms / astar_ms
  double astar_cost = 0.0;
  double dp_cost = 0.0;
};

struct BenchConfig {
  std::vector<int> sizes{16, 32, 64, 100};
  int reps = 5;
  std::uint64_t seed = 1;
  double obstacle_density = 0.2;
  double belief_confidence = 20.0;
  CostEncoderParams cost;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

// Corner-to-corner planning on seeded random maps; DP runs width + height sweeps.
BenchReport bench_planner(const BenchConfig& cfg, PlanTrace* trace = nullptr);
void write_bench_csv(std::ostream& out, const BenchReport& r, bool include_timing = true);

}  // namespace navirl
