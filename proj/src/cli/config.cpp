#include "navirl/cli/config.hpp"

#include <stdexcept>

#include "navirl/io.hpp"

namespace navirl::cli {

using nlohmann::json;

json default_config() {
  return json::parse(R"({
    "seed": 1,
    "threads": 0,
    "out": "out",
    "map": {"width": 16, "height": 16, "obstacle_density": 0.2},
    "sensor": {"beams": 72, "max_range": 2.5, "noise_sigma": 0.05},
    "dataset": {
      "dir": "data",
      "train_maps": 200,
      "val_maps": 20,
      "test_maps": 100,
      "trajectories_per_map": 10,
      "min_distance": 4
    },
    "model": {
      "psi_init": 1.0,
      "shared_psi": false,
      "h0": 0.0,
      "epsilon": 1.0,
      "march_step": 0.3,
      "s": 1.0,
      "l": 100.0,
      "cost_mode": "soft",
      "train_h0": true
    },
    "train": {
      "lr": 0.01,
      "beta1": 0.9,
      "beta2": 0.999,
      "adam_eps": 1e-8,
      "epochs": 30,
      "batch_demos": 1,
      "eps_h": 1.0,
      "shuffle": true,
      "select": "val_success",
      "resume": ""
    },
    "eval": {
      "checkpoint": "",
      "full_information": false,
      "full_information_confidence": 50.0,
      "eps_h": 1.0,
      "trace": false
    },
    "bench": {
      "sizes": [16, 32, 64, 100],
      "reps": 5,
      "obstacle_density": 0.2,
      "belief_confidence": 20.0,
      "trace": ""
    },
    "dyna": {
      "width": 9,
      "height": 6,
      "wall_row": 3,
      "start": [4, 5],
      "goal": [4, 0],
      "first_door": 8,
      "second_door": 0,
      "switch_step": 1000,
      "total_steps": 3000,
      "beams": 72,
      "max_range": 2.5,
      "noise_sigma": 0.0,
      "gamma_step": 0.99,
      "phase_retention": 1.0,
      "episode_step_cap": 200,
      "psi": 5.0,
      "h0": -1.0,
      "epsilon": 0.75,
      "checkpoint": ""
    },
    "render": {"map_index": 0, "checkpoint": ""}
  })");
}

namespace {

bool compatible(const json& def, const json& val) {
  if (def.is_number() && val.is_number()) {
    return !(def.is_number_integer() && !val.is_number_integer());
  }
  return def.type() == val.type();
}

void merge_strict(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw std::invalid_argument("config: expected an object at '" + prefix + "'");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw std::invalid_argument("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else if (!compatible(slot, it.value())) {
      throw std::invalid_argument("config: wrong type for '" + key + "'");
    } else {
      slot = it.value();
    }
  }
}

State state_of(const json& j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

}  // namespace

RunConfig::RunConfig() : j_(default_config()) {}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    const std::string text = read_file(path);
    json patch;
    try {
      patch = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
    cfg.merge(patch);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::merge(const json& patch) { merge_strict(j_, patch, ""); }

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare strings
  }
  json patch = parsed;
  std::string rest = dotted_key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos;) {
    parts.push_back(rest.substr(0, pos));
    rest = rest.substr(pos + 1);
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  merge(patch);
}

std::uint64_t RunConfig::seed() const { return j_.at("seed").get<std::uint64_t>(); }
unsigned RunConfig::threads() const { return j_.at("threads").get<unsigned>(); }
std::string RunConfig::out_dir() const { return j_.at("out").get<std::string>(); }
std::string RunConfig::dataset_dir() const { return j_.at("dataset").at("dir").get<std::string>(); }

LidarConfig RunConfig::sensor() const {
  const auto& s = j_.at("sensor");
  return {s.at("beams").get<int>(), s.at("max_range").get<double>(),
          s.at("noise_sigma").get<double>()};
}

DatasetConfig RunConfig::dataset(const std::string& split) const {
  const auto& m = j_.at("map");
  const auto& d = j_.at("dataset");
  DatasetConfig c;
  c.width = m.at("width").get<int>();
  c.height = m.at("height").get<int>();
  c.obstacle_density = m.at("obstacle_density").get<double>();
  c.min_distance = d.at("min_distance").get<int>();
  c.trajectories_per_map = d.at("trajectories_per_map").get<int>();
  std::uint64_t stream = 0;
  if (split == "train") {
    c.maps = d.at("train_maps").get<int>();
    stream = 1;
  } else if (split == "val") {
    c.maps = d.at("val_maps").get<int>();
    stream = 2;
  } else if (split == "test") {
    c.maps = d.at("test_maps").get<int>();
    c.trajectories_per_map = 1;
    stream = 3;
  } else {
    throw std::invalid_argument("unknown split " + split);
  }
  c.seed = derive_seed(seed(), stream);
  return c;
}

ThetaParams RunConfig::initial_theta() const {
  const auto& m = j_.at("model");
  ThetaParams t;
  const int beams = j_.at("sensor").at("beams").get<int>();
  const double psi = m.at("psi_init").get<double>();
  t.sensor.psi.assign(m.at("shared_psi").get<bool>() ? 1 : beams, psi);
  t.sensor.h0 = m.at("h0").get<double>();
  t.sensor.epsilon = m.at("epsilon").get<double>();
  t.sensor.march_step = m.at("march_step").get<double>();
  t.cost.s = m.at("s").get<double>();
  t.cost.l = m.at("l").get<double>();
  const auto mode = m.at("cost_mode").get<std::string>();
  t.cost.mode = mode == "hard" ? CostMode::hard_coded : CostMode::soft_coded;
  t.train_h0 = m.at("train_h0").get<bool>();
  return t;
}

TrainConfig RunConfig::train() const {
  const auto& t = j_.at("train");
  TrainConfig c;
  c.adam.lr = t.at("lr").get<double>();
  c.adam.beta1 = t.at("beta1").get<double>();
  c.adam.beta2 = t.at("beta2").get<double>();
  c.adam.eps = t.at("adam_eps").get<double>();
  c.epochs = t.at("epochs").get<int>();
  c.batch_demos = t.at("batch_demos").get<int>();
  c.eps_h = t.at("eps_h").get<double>();
  c.shuffle = t.at("shuffle").get<bool>();
  c.seed = derive_seed(seed(), 10);
  c.threads = threads();
  return c;
}

RolloutConfig RunConfig::rollout() const {
  const auto& e = j_.at("eval");
  RolloutConfig c;
  c.sensor = sensor();
  c.eps_h = e.at("eps_h").get<double>();
  c.full_information = e.at("full_information").get<bool>();
  c.full_information_confidence = e.at("full_information_confidence").get<double>();
  return c;
}

BenchConfig RunConfig::bench() const {
  const auto& b = j_.at("bench");
  BenchConfig c;
  c.sizes = b.at("sizes").get<std::vector<int>>();
  c.reps = b.at("reps").get<int>();
  c.obstacle_density = b.at("obstacle_density").get<double>();
  c.belief_confidence = b.at("belief_confidence").get<double>();
  c.seed = seed();
  c.cost.s = j_.at("model").at("s").get<double>();
  c.cost.l = j_.at("model").at("l").get<double>();
  return c;
}

DynaConfig RunConfig::dyna() const {
  const auto& d = j_.at("dyna");
  DynaConfig c;
  c.width = d.at("width").get<int>();
  c.height = d.at("height").get<int>();
  c.wall_row = d.at("wall_row").get<int>();
  c.start = state_of(d.at("start"));
  c.goal = state_of(d.at("goal"));
  c.first_door = d.at("first_door").get<int>();
  c.second_door = d.at("second_door").get<int>();
  c.switch_step = d.at("switch_step").get<long>();
  c.total_steps = d.at("total_steps").get<long>();
  c.sensor = {d.at("beams").get<int>(), d.at("max_range").get<double>(),
              d.at("noise_sigma").get<double>()};
  c.gamma_step = d.at("gamma_step").get<double>();
  c.phase_retention = d.at("phase_retention").get<double>();
  c.episode_step_cap = d.at("episode_step_cap").get<int>();
  c.psi = d.at("psi").get<double>();
  c.h0 = d.at("h0").get<double>();
  c.epsilon = d.at("epsilon").get<double>();
  c.seed = seed();
  return c;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  const auto& m = j_.at("map");
  if (m.at("width").get<int>() < 2 || m.at("height").get<int>() < 2) fail("map must be at least 2x2");
  const double density = m.at("obstacle_density").get<double>();
  if (!(density >= 0.0 && density < 1.0)) fail("map.obstacle_density must lie in [0, 1)");
  const auto s = sensor();
  if (s.beams < 1) fail("sensor.beams must be >= 1");
  if (!(s.max_range > 0.0)) fail("sensor.max_range must be > 0");
  if (s.noise_sigma < 0.0) fail("sensor.noise_sigma must be >= 0");
  const auto theta = initial_theta();
  if (!(theta.cost.s > 0.0 && theta.cost.l > theta.cost.s)) fail("model requires 0 < s < l");
  if (!(theta.sensor.epsilon > 0.0)) fail("model.epsilon must be > 0");
  const auto mode = j_.at("model").at("cost_mode").get<std::string>();
  if (mode != "soft" && mode != "hard") fail("model.cost_mode must be 'soft' or 'hard'");
  const auto t = train();
  if (!(t.adam.lr > 0.0)) fail("train.lr must be > 0");
  if (t.batch_demos < 0) fail("train.batch_demos must be >= 0");
  if (t.epochs < 0) fail("train.epochs must be >= 0");
  if (!(t.eps_h >= 1.0)) fail("train.eps_h must be >= 1");
  const auto select = j_.at("train").at("select").get<std::string>();
  if (select != "val_success" && select != "val_loss") {
    fail("train.select must be 'val_success' or 'val_loss'");
  }
  const auto dy = dyna();
  if (!(dy.gamma_step > 0.0 && dy.gamma_step <= 1.0)) fail("dyna.gamma_step must lie in (0, 1]");
  if (!(dy.epsilon > 0.0)) fail("dyna.epsilon must be > 0");
  if (dy.sensor.beams < 1) fail("dyna.beams must be >= 1");
  const auto& d = j_.at("dataset");
  for (const char* k : {"train_maps", "val_maps", "test_maps", "trajectories_per_map"}) {
    if (d.at(k).get<int>() < 0) fail(std::string("dataset.") + k + " must be >= 0");
  }
}

}  // namespace navirl::cli
