#include "navirl/cli/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "navirl/io.hpp"

namespace navirl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "navirl 0.1.0";
constexpr const char* kSplits[] = {"train", "val", "test"};

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_run_files(const RunConfig& cfg, const std::string& command, const json& inputs,
                     const json& extra) {
  const std::string out = cfg.out_dir();
  write_json(join(out, "config.json"), cfg.data());
  json manifest{{"command", command},
                {"version", kVersion},
                {"seed", cfg.seed()},
                {"config", cfg.data()},
                {"inputs", inputs}};
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  write_json(join(out, "manifest.json"), manifest);
}

std::string map_path(const std::string& dir, const std::string& split, int id) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%05d.grid", split.c_str(), id);
  return join(join(dir, "maps"), name);
}

struct Split {
  std::vector<GridMap> maps;
  std::vector<Demonstration> demos;
};

Split load_split(const std::string& dir, const std::string& split, double max_range) {
  const std::string manifest_path = join(dir, "manifest.json");
  if (!fs::exists(manifest_path)) throw MissingInputError("no dataset manifest at " + manifest_path);
  const json manifest = read_json(manifest_path);
  const int maps = manifest.at("splits").at(split).at("maps").get<int>();
  Split s;
  for (int i = 0; i < maps; ++i) s.maps.push_back(load_map(map_path(dir, split, i)));
  const std::string demos_path = join(dir, split + ".jsonl");
  std::ifstream in(demos_path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + demos_path);
  s.demos = read_demos_jsonl(in, max_range);
  for (const auto& d : s.demos) {
    if (d.map_id < 0 || d.map_id >= maps) {
      throw IntegrityError(demos_path + ": map_id " + std::to_string(d.map_id) + " out of range");
    }
  }
  return s;
}

ThetaParams theta_for(const RunConfig& cfg, const std::string& checkpoint, json& inputs) {
  if (checkpoint.empty()) return cfg.initial_theta();
  inputs["checkpoint"] = file_hash(checkpoint);
  return checkpoint_from_json(read_json(checkpoint)).theta;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

}  // namespace

std::string dataset_hash(const std::string& dir) {
  std::uint64_t h = fnv1a64(read_file(join(dir, "train.jsonl")));
  h = fnv1a64(read_file(join(dir, "val.jsonl")), h);
  return hex64(h);
}

int cmd_gen(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string out = cfg.out_dir();
  ensure_dir(join(out, "maps"));
  const auto sensor = cfg.sensor();
  json splits = json::object();
  json hashes = json::object();
  long total_trajectories = 0;
  for (const std::string split : kSplits) {
    const auto dcfg = cfg.dataset(split);
    const Dataset ds = generate_dataset(dcfg, sensor, cfg.threads());
    for (std::size_t i = 0; i < ds.maps.size(); ++i) {
      save_map(map_path(out, split, static_cast<int>(i)), ds.maps[i]);
    }
    std::ostringstream lines;
    write_demos_jsonl(lines, ds.demos);
    const std::string path = join(out, split + ".jsonl");
    write_file(path, lines.str());
    long steps = 0;
    for (const auto& d : ds.demos) steps += d.steps();
    splits[split] = {{"maps", ds.maps.size()},
                     {"trajectories", ds.demos.size()},
                     {"samples", steps},
                     {"seed", dcfg.seed}};
    hashes[split] = hex64(fnv1a64(lines.str()));
    total_trajectories += static_cast<long>(ds.demos.size());
    log << split << ": " << ds.maps.size() << " maps, " << ds.demos.size() << " trajectories, "
        << steps << " samples\n";
  }
  write_run_files(cfg, "gen", json::object(),
                  {{"splits", splits},
                   {"trajectories", total_trajectories},
                   {"file_hashes", hashes},
                   {"dataset_hash", dataset_hash(out)}});
  return kOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string dir = cfg.dataset_dir();
  const auto sensor = cfg.sensor();
  const Split train_split = load_split(dir, "train", sensor.max_range);
  const Split val_split = load_split(dir, "val", sensor.max_range);
  if (train_split.maps.empty() || train_split.demos.empty()) {
    throw MissingInputError("dataset " + dir + " has no training demonstrations");
  }
  const std::string hash = dataset_hash(dir);

  TrainingData data;
  data.train = train_split.demos;
  data.val = val_split.demos;
  data.width = train_split.maps.front().width();
  data.height = train_split.maps.front().height();

  ThetaParams init = cfg.initial_theta();
  AdamState resume_state;
  const AdamState* resume = nullptr;
  json inputs{{"dataset", hash}};
  const std::string resume_path = cfg.data().at("train").at("resume").get<std::string>();
  if (!resume_path.empty()) {
    const Checkpoint ckpt = checkpoint_from_json(read_json(resume_path));
    if (ckpt.dataset_hash != hash) {
      throw IntegrityError("checkpoint " + resume_path + " was trained on dataset " +
                           ckpt.dataset_hash + ", not " + hash);
    }
    init = ckpt.theta;
    resume_state = ckpt.optimizer;
    resume = &resume_state;
    inputs["resume"] = file_hash(resume_path);
  }

  TrainConfig tcfg = cfg.train();
  if (cfg.data().at("train").at("select").get<std::string>() == "val_success" &&
      !val_split.demos.empty()) {
    std::vector<Task> tasks;
    for (const auto& d : val_split.demos) tasks.push_back({d.map_id, d.start, d.goal});
    RolloutConfig rcfg = cfg.rollout();
    rcfg.full_information = false;
    const auto seed = derive_seed(cfg.seed(), 11);
    const unsigned threads = cfg.threads();
    tcfg.rollout_score = [maps = val_split.maps, tasks, rcfg, seed, threads](const ThetaParams& t) {
      const auto m = evaluate(t, maps, tasks, rcfg, seed, threads).metrics;
      return RolloutScore{m.success_rate, m.traj_diff};
    };
  }
  const TrainResult result = train(data, init, tcfg, resume);
  for (const auto& m : result.history) {
    log << "epoch " << m.epoch << " train_loss " << fixed(m.train_loss, 4) << " val_loss "
        << fixed(m.val_loss, 4) << " val_acc " << fixed(100.0 * m.val_acc, 1) << "%";
    if (m.val_success >= 0.0) log << " val_success " << fixed(m.val_success, 1) << "%";
    log << "\n";
  }

  const std::string out = cfg.out_dir();
  ensure_dir(out);
  Checkpoint best{result.best_theta, result.optimizer, cfg.data(), hash};
  Checkpoint last{result.final_theta, result.optimizer, cfg.data(), hash};
  write_json(join(out, "checkpoint.json"), checkpoint_to_json(best));
  write_json(join(out, "last.json"), checkpoint_to_json(last));
  std::ostringstream csv;
  write_metrics_csv(csv, result.history);
  write_file(join(out, "metrics.csv"), csv.str());
  write_run_files(cfg, "train", inputs,
                  {{"best_epoch", result.best_epoch},
                   {"optimizer_step", result.optimizer.step},
                   {"capped_losses", result.capped_losses}});
  log << "s " << result.best_theta.cost.s << " l " << result.best_theta.cost.l << " (best epoch "
      << result.best_epoch << ", optimizer step " << result.optimizer.step << ")\n";
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto sensor = cfg.sensor();
  const Split test = load_split(cfg.dataset_dir(), "test", sensor.max_range);
  if (test.demos.empty()) throw MissingInputError("dataset has no test tasks");
  json inputs{{"test", file_hash(join(cfg.dataset_dir(), "test.jsonl"))}};
  const ThetaParams theta =
      theta_for(cfg, cfg.data().at("eval").at("checkpoint").get<std::string>(), inputs);
  std::vector<Task> tasks;
  for (const auto& d : test.demos) tasks.push_back({d.map_id, d.start, d.goal});
  const auto report = evaluate(theta, test.maps, tasks, cfg.rollout(), derive_seed(cfg.seed(), 20),
                               cfg.threads());
  const std::string out = cfg.out_dir();
  ensure_dir(out);
  std::ostringstream csv;
  write_eval_csv(csv, report.metrics);
  write_file(join(out, "eval.csv"), csv.str());
  if (cfg.data().at("eval").at("trace").get<bool>()) {
    std::ostringstream traces;
    write_rollouts_jsonl(traces, report.rollouts);
    write_file(join(out, "rollouts.jsonl"), traces.str());
  }
  write_run_files(cfg, "eval", inputs, json::object());
  const auto& m = report.metrics;
  log << "trials " << m.trials << " success " << fixed(m.success_rate, 1) << "% traj_diff "
      << fixed(m.traj_diff, 3) << " collision " << fixed(m.collision_rate, 1) << "% timeout "
      << fixed(m.timeout_rate, 1) << "%\n";
  return kOk;
}

int cmd_bench(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto bcfg = cfg.bench();
  const std::string trace_path = cfg.data().at("bench").at("trace").get<std::string>();
  PlanTrace trace;
  const auto report = bench_planner(bcfg, trace_path.empty() ? nullptr : &trace);
  const std::string out = cfg.out_dir();
  ensure_dir(out);
  std::ostringstream full, counts;
  write_bench_csv(full, report, true);
  write_bench_csv(counts, report, false);
  write_file(join(out, "bench.csv"), full.str());
  write_file(join(out, "bench_counts.csv"), counts.str());
  if (!trace_path.empty()) {
    std::ostringstream t;
    trace.write_jsonl(t);
    write_file(trace_path, t.str());
  }
  write_run_files(cfg, "bench", json::object(), json::object());
  log << "size  astar_exp  dp_backups  astar_ms  dp_ms  time_ratio\n";
  for (const auto& r : report.rows) {
    log << r.size << "  " << r.astar_expansions << "  " << r.dp_backups << "  "
        << fixed(r.astar_ms, 3) << "  " << fixed(r.dp_ms, 3) << "  " << fixed(r.time_ratio, 1)
        << "\n";
  }
  return kOk;
}

int cmd_dyna(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  json inputs = json::object();
  const auto dcfg = cfg.dyna();
  const std::string checkpoint = cfg.data().at("dyna").at("checkpoint").get<std::string>();
  const ThetaParams dyna_theta = checkpoint.empty()
                                     ? navirl::dyna_theta(dcfg, cfg.initial_theta().cost)
                                     : theta_for(cfg, checkpoint, inputs);
  if (static_cast<int>(dyna_theta.sensor.psi.size()) != dcfg.sensor.beams &&
      dyna_theta.sensor.psi.size() != 1) {
    throw std::invalid_argument("dyna: model psi size does not match dyna.beams");
  }
  const DynaResult r = dyna_blocking_maze(dyna_theta, dcfg);
  const std::string out = cfg.out_dir();
  ensure_dir(out);
  std::ostringstream curve;
  write_dyna_csv(curve, r);
  write_file(join(out, "dyna.csv"), curve.str());
  std::ostringstream eps;
  eps << "episode,phase,start_step,length,completed,door_column\n";
  for (const auto& e : r.episodes) {
    eps << e.index << ',' << e.phase << ',' << e.start_step << ',' << e.length << ','
        << (e.completed ? 1 : 0) << ',' << e.door_column << '\n';
  }
  write_file(join(out, "dyna_episodes.csv"), eps.str());
  write_run_files(cfg, "dyna", inputs,
                  {{"phase1_length", r.phase1_length}, {"phase2_length", r.phase2_length}});
  log << "episodes " << r.episodes.size() << " completed "
      << (r.curve.empty() ? 0 : r.curve.back().second) << " switch at episode "
      << r.first_phase2_episode << "\n";
  return kOk;
}

int cmd_render(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto sensor = cfg.sensor();
  const Split test = load_split(cfg.dataset_dir(), "test", sensor.max_range);
  const int map_index = cfg.data().at("render").at("map_index").get<int>();
  const Demonstration* task = nullptr;
  for (const auto& d : test.demos) {
    if (d.map_id == map_index) {
      task = &d;
      break;
    }
  }
  if (!task) throw MissingInputError("no test task for map " + std::to_string(map_index));
  json inputs = json::object();
  const ThetaParams theta =
      theta_for(cfg, cfg.data().at("render").at("checkpoint").get<std::string>(), inputs);
  const GridMap& map = test.maps.at(map_index);
  const std::string out = cfg.out_dir();
  ensure_dir(out);
  {
    std::vector<double> occ(map.size());
    for (int i = 0; i < map.size(); ++i) occ[i] = map.cells()[i] == GridMap::kOccupied ? 1.0 : 0.0;
    std::ostringstream pgm;
    write_pgm(pgm, map.width(), map.height(), occ);
    write_file(join(out, "true_map.pgm"), pgm.str());
  }
  auto observer = [&](const RolloutStep& s) {
    char name[64];
    std::snprintf(name, sizeof name, "belief_%03d.pgm", s.t);
    std::ostringstream b;
    write_belief_pgm(b, *s.belief);
    write_file(join(out, name), b.str());
    double gmax = 0.0;
    for (double g : s.plan->g) {
      if (g < kInf) gmax = std::max(gmax, g);
    }
    std::vector<double> v(s.plan->g.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = s.plan->g[i] < kInf && gmax > 0 ? s.plan->g[i] / gmax : 1.0;
    }
    std::snprintf(name, sizeof name, "value_%03d.pgm", s.t);
    std::ostringstream vp;
    write_pgm(vp, s.plan->width, s.plan->height, v);
    write_file(join(out, name), vp.str());
  };
  const auto r = rollout(theta, map, task->start, task->goal, cfg.rollout(),
                         derive_seed(cfg.seed(), 30), observer);
  std::ostringstream traj;
  write_rollouts_jsonl(traj, {r});
  write_file(join(out, "trajectory.jsonl"), traj.str());
  write_run_files(cfg, "render", inputs, json::object());
  log << "rendered " << r.plans << " steps, outcome " << outcome_name(r.outcome) << "\n";
  return kOk;
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log,
                std::ostream& err) {
  try {
    if (command == "gen") return cmd_gen(cfg, log);
    if (command == "train") return cmd_train(cfg, log);
    if (command == "eval") return cmd_eval(cfg, log);
    if (command == "bench") return cmd_bench(cfg, log);
    if (command == "dyna") return cmd_dyna(cfg, log);
    if (command == "render") return cmd_render(cfg, log);
    err << "unknown command " << command << "\n";
    return kInternal;
  } catch (const MissingInputError& e) {
    err << "error: " << e.what() << "\n";
    return kMissingInput;
  } catch (const IntegrityError& e) {
    err << "error: " << e.what() << "\n";
    return kIntegrity;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace navirl::cli
