#include "navirl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "navirl/io.hpp"
#include "navirl/parallel.hpp"

namespace navirl {

using nlohmann::json;

std::vector<double> pack(const ThetaParams& theta) {
  std::vector<double> flat(theta.sensor.psi);
  flat.push_back(theta.sensor.h0);
  flat.push_back(std::log(theta.cost.s));
  flat.push_back(std::log(theta.cost.l));
  return flat;
}

void unpack(ThetaParams& theta, const std::vector<double>& flat) {
  const std::size_t p = theta.sensor.psi.size();
  if (flat.size() != p + 3) throw std::invalid_argument("unpack: wrong parameter count");
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(p), theta.sensor.psi.begin());
  theta.sensor.h0 = flat[p];
  theta.cost.s = std::exp(flat[p + 1]);
  theta.cost.l = std::exp(flat[p + 2]);
}

std::vector<bool> trainable_mask(const ThetaParams& theta) {
  std::vector<bool> mask(theta.sensor.psi.size(), true);
  mask.push_back(theta.train_h0);
  const bool soft = theta.cost.mode == CostMode::soft_coded;
  mask.push_back(soft);
  mask.push_back(soft);
  return mask;
}

void GradAccumulator::zero() {
  std::fill(dpsi.begin(), dpsi.end(), 0.0);
  dh0 = dlog_s = dlog_l = loss = 0.0;
  samples = correct = 0;
}

void GradAccumulator::add(const GradAccumulator& other) {
  if (dpsi.size() != other.dpsi.size()) throw std::invalid_argument("GradAccumulator shape mismatch");
  for (std::size_t i = 0; i < dpsi.size(); ++i) dpsi[i] += other.dpsi[i];
  dh0 += other.dh0;
  dlog_s += other.dlog_s;
  dlog_l += other.dlog_l;
  loss += other.loss;
  samples += other.samples;
  correct += other.correct;
}

std::vector<double> GradAccumulator::flat() const {
  std::vector<double> g(dpsi);
  g.push_back(dh0);
  g.push_back(dlog_s);
  g.push_back(dlog_l);
  return g;
}

double nll_loss(const Policy& pi, Control u_star, long* capped) {
  const double p = pi[index_of(u_star)];
  if (p < kMinProb) {
    if (capped) ++*capped;
    return -std::log(kMinProb);
  }
  return std::max(0.0, -std::log(p));
}

std::array<double, kNumControls> policy_grad_wrt_q(const Policy& pi, Control u_star) {
  std::array<double, kNumControls> d{};
  for (int i = 0; i < kNumControls; ++i) {
    d[i] = (i == index_of(u_star) ? 1.0 : 0.0) - pi[i];
  }
  return d;
}

void step_gradient(const BeliefState& h, const BeliefTape& tape, const PlanResult& plan,
                   State x_t, const std::array<double, kNumControls>& dq,
                   const ThetaParams& theta, GradAccumulator& acc) {
  double ds = 0.0;
  double dl = 0.0;
  std::vector<double> cell_weight(h.size(), 0.0);
  std::vector<int> touched;
  auto add_cell = [&](int cell, double w) {
    if (cell_weight[cell] == 0.0) touched.push_back(cell);
    cell_weight[cell] += w;
  };
  for (Control u : kAllControls) {
    const double d = dq[index_of(u)];
    if (d == 0.0) continue;
    const auto mu = visitation_subgradient(plan, x_t, u, GradientFlow::closed_and_open);
    for (const auto& e : mu) {
      const State x{e.cell % h.width(), e.cell / h.width()};
      const auto cg = cost_grads(h, x, e.u, theta.cost);
      ds += d * cg.ds;
      dl += d * cg.dl;
      add_cell(cg.from_cell, d * cg.dh_from);
      if (cg.to_cell >= 0) add_cell(cg.to_cell, d * cg.dh_to);
    }
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  for (int cell : touched) {
    const double w = cell_weight[cell];
    if (w == 0.0) continue;
    if (tape.cells() == h.size()) {
      const auto dpsi = tape.dpsi(cell);
      for (int k = 0; k < tape.beams(); ++k) {
        if (dpsi[k] != 0.0) acc.dpsi[theta.sensor.weight_index(k)] += w * dpsi[k];
      }
      acc.dh0 += w * tape.dh0(cell);
    } else {
      acc.dh0 += w;  // no observations: h == h0
    }
  }
  acc.dlog_s += theta.cost.s * ds;
  acc.dlog_l += theta.cost.l * dl;
}

StepOutcome evaluate_step(const BeliefState& h, const BeliefTape* tape, State x_t, State goal,
                          Control u_star, const ThetaParams& theta, const StepOptions& opts,
                          GradAccumulator* acc, long* capped) {
  const CostField cost(h, theta.cost);
  const PlanResult plan = astar_backward(cost, x_t, goal, opts.eps_h);
  StepOutcome out;
  out.expansions = plan.expansions;
  out.q = q_values(plan, cost, x_t);
  out.pi = boltzmann_policy(out.q);
  long capped_here = 0;
  out.loss = nll_loss(out.pi, u_star, &capped_here);
  if (capped) *capped += capped_here;
  out.correct = greedy_control(out.pi) == u_star;
  if (acc) {
    acc->loss += out.loss;
    acc->samples += 1;
    acc->correct += out.correct ? 1 : 0;
    // The capped loss is flat in theta.
    if (capped_here > 0) return out;
    const auto dq = policy_grad_wrt_q(out.pi, u_star);
    static const BeliefTape kEmptyTape;
    step_gradient(h, tape ? *tape : kEmptyTape, plan, x_t, dq, theta, *acc);
  }
  return out;
}

GradAccumulator process_demo(const Demonstration& demo, int width, int height,
                             const ThetaParams& theta, const StepOptions& opts, bool with_grad,
                             long* capped) {
  GradAccumulator acc(theta.sensor.psi.size());
  BeliefState h(width, height, theta.sensor.h0);
  const int beams = demo.scans.empty() ? 0 : demo.scans.front().beams();
  BeliefTape tape(width * height, beams);
  for (int t = 0; t < demo.steps(); ++t) {
    observe_and_update(h, demo.states[t], demo.scans[t], theta.sensor,
                       with_grad ? &tape : nullptr);
    if (with_grad) {
      const auto out = evaluate_step(h, &tape, demo.states[t], demo.goal, demo.controls[t], theta,
                                     opts, &acc, capped);
      if (!std::isfinite(out.loss)) {
        std::ostringstream msg;
        msg << "non-finite loss on map " << demo.map_id << " step " << t << " at ("
            << demo.states[t].x << "," << demo.states[t].y << "), Q =";
        for (double q : out.q) msg << ' ' << q;
        throw std::runtime_error(msg.str());
      }
    } else {
      const auto out = evaluate_step(h, nullptr, demo.states[t], demo.goal, demo.controls[t],
                                     theta, opts, nullptr, capped);
      acc.loss += out.loss;
      acc.samples += 1;
      acc.correct += out.correct ? 1 : 0;
    }
  }
  return acc;
}

void adam_step(ThetaParams& theta, const std::vector<double>& grad, const AdamConfig& cfg,
               AdamState& state) {
  auto flat = pack(theta);
  const auto mask = trainable_mask(theta);
  if (grad.size() != flat.size()) throw std::invalid_argument("adam_step: gradient size mismatch");
  if (state.m.empty()) {
    state.m.assign(flat.size(), 0.0);
    state.v.assign(flat.size(), 0.0);
  }
  if (state.m.size() != flat.size()) throw std::invalid_argument("adam_step: state size mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!mask[i]) continue;
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    flat[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
  unpack(theta, flat);
  if (theta.cost.l < theta.cost.s + kMinCostGap) theta.cost.l = theta.cost.s + kMinCostGap;
}

ValidationScore score_demos(const std::vector<Demonstration>& demos, int width, int height,
                            const ThetaParams& theta, double eps_h, unsigned threads) {
  std::vector<GradAccumulator> parts(demos.size(), GradAccumulator(theta.sensor.psi.size()));
  StepOptions opts;
  opts.eps_h = eps_h;
  parallel_for(demos.size(), threads, [&](std::size_t i) {
    parts[i] = process_demo(demos[i], width, height, theta, opts, false);
  });
  GradAccumulator total(theta.sensor.psi.size());
  for (const auto& p : parts) total.add(p);
  ValidationScore s;
  s.samples = total.samples;
  if (total.samples > 0) {
    s.loss = total.loss / static_cast<double>(total.samples);
    s.accuracy = static_cast<double>(total.correct) / static_cast<double>(total.samples);
  }
  return s;
}

TrainResult train(const TrainingData& data, const ThetaParams& init, const TrainConfig& cfg,
                  const AdamState* resume) {
  if (data.train.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(cfg.adam.lr > 0.0)) throw std::invalid_argument("train: learning rate must be positive");
  if (cfg.batch_demos < 0) throw std::invalid_argument("train: batch must be >= 0");

  TrainResult result;
  result.final_theta = init;
  result.best_theta = init;
  if (resume) result.optimizer = *resume;
  ThetaParams& theta = result.final_theta;
  StepOptions opts;
  opts.eps_h = cfg.eps_h;

  const std::size_t n = data.train.size();
  const std::size_t batch = cfg.batch_demos == 0 ? n : static_cast<std::size_t>(cfg.batch_demos);
  EpochMetrics best;
  bool have_best = false;
  auto better = [&](const EpochMetrics& a, const EpochMetrics& b) {
    if (cfg.rollout_score) {
      if (a.val_success != b.val_success) return a.val_success > b.val_success;
      if (a.val_traj_diff != b.val_traj_diff) return a.val_traj_diff < b.val_traj_diff;
    }
    return a.val_loss < b.val_loss;
  };

  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    if (cfg.shuffle) {
      std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
      std::shuffle(order.begin(), order.end(), rng);
    }
    GradAccumulator epoch_total(theta.sensor.psi.size());
    for (std::size_t b = 0; b < n; b += batch) {
      const std::size_t e = std::min(n, b + batch);
      std::vector<GradAccumulator> parts(e - b, GradAccumulator(theta.sensor.psi.size()));
      std::vector<long> capped(e - b, 0);
      parallel_for(e - b, cfg.threads, [&](std::size_t i) {
        parts[i] = process_demo(data.train[order[b + i]], data.width, data.height, theta, opts,
                                true, &capped[i]);
      });
      GradAccumulator batch_total(theta.sensor.psi.size());
      for (std::size_t i = 0; i < parts.size(); ++i) {
        batch_total.add(parts[i]);
        result.capped_losses += capped[i];
      }
      epoch_total.add(batch_total);
      if (batch_total.samples == 0) continue;
      auto grad = batch_total.flat();
      for (auto& g : grad) g /= static_cast<double>(batch_total.samples);
      adam_step(theta, grad, cfg.adam, result.optimizer);
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = epoch_total.samples ? epoch_total.loss / epoch_total.samples : 0.0;
    if (!data.val.empty()) {
      const auto v = score_demos(data.val, data.width, data.height, theta, cfg.eps_h, cfg.threads);
      m.val_loss = v.loss;
      m.val_acc = v.accuracy;
    } else {
      m.val_loss = m.train_loss;
    }
    if (!std::isfinite(m.train_loss) || !std::isfinite(m.val_loss)) {
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(m.epoch));
    }
    if (cfg.rollout_score) {
      const RolloutScore r = cfg.rollout_score(theta);
      m.val_success = r.success_rate;
      m.val_traj_diff = r.traj_diff;
    }
    if (!have_best || better(m, best)) {
      have_best = true;
      best = m;
      result.best_theta = theta;
      result.best_epoch = m.epoch;
    }
    result.history.push_back(m);
  }
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history) {
  out << "epoch,train_loss,val_loss,val_acc,val_success,val_traj_diff\n";
  out.precision(10);
  for (const auto& m : history) {
    out << m.epoch << ',' << m.train_loss << ',' << m.val_loss << ',' << m.val_acc << ','
        << m.val_success << ',' << m.val_traj_diff << '\n';
  }
}

json theta_to_json(const ThetaParams& theta) {
  return json{{"psi", theta.sensor.psi},
              {"h0", theta.sensor.h0},
              {"epsilon", theta.sensor.epsilon},
              {"march_step", theta.sensor.march_step},
              {"s", theta.cost.s},
              {"l", theta.cost.l},
              {"cost_mode", theta.cost.mode == CostMode::soft_coded ? "soft" : "hard"},
              {"train_h0", theta.train_h0}};
}

ThetaParams theta_from_json(const json& j) {
  ThetaParams t;
  t.sensor.psi = j.at("psi").get<std::vector<double>>();
  t.sensor.h0 = j.at("h0").get<double>();
  t.sensor.epsilon = j.at("epsilon").get<double>();
  t.sensor.march_step = j.value("march_step", 0.3);
  t.cost.s = j.at("s").get<double>();
  t.cost.l = j.at("l").get<double>();
  const auto mode = j.value("cost_mode", std::string("soft"));
  if (mode != "soft" && mode != "hard") throw std::runtime_error("unknown cost_mode " + mode);
  t.cost.mode = mode == "soft" ? CostMode::soft_coded : CostMode::hard_coded;
  t.train_h0 = j.value("train_h0", false);
  if (t.sensor.psi.empty()) throw std::runtime_error("checkpoint has empty psi");
  return t;
}

json checkpoint_to_json(const Checkpoint& ckpt) {
  json j = theta_to_json(ckpt.theta);
  j["optimizer"] = json{{"m", ckpt.optimizer.m}, {"v", ckpt.optimizer.v}, {"step", ckpt.optimizer.step}};
  j["config"] = ckpt.config;
  j["dataset_hash"] = ckpt.dataset_hash;
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  c.theta = theta_from_json(j);
  const auto& opt = j.at("optimizer");
  c.optimizer.m = opt.at("m").get<std::vector<double>>();
  c.optimizer.v = opt.at("v").get<std::vector<double>>();
  c.optimizer.step = opt.at("step").get<long>();
  c.config = j.value("config", json::object());
  c.dataset_hash = j.value("dataset_hash", std::string());
  return c;
}

}  // namespace navirl
