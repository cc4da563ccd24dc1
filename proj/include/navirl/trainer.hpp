#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "navirl/belief.hpp"
#include "navirl/cost.hpp"
#include "navirl/dataset.hpp"
#include "navirl/planner.hpp"

namespace navirl {

// Learnable parameters: beam weights psi, optionally the prior h0, and the
// cost encoder (s, l). epsilon and the ray-march step stay fixed.
struct ThetaParams {
  SensorModelParams sensor;
  CostEncoderParams cost;
  bool train_h0 = false;
};

// Flat layout used by the optimizer: psi..., h0, log s, log l.
std::vector<double> pack(const ThetaParams& theta);
void unpack(ThetaParams& theta, const std::vector<double>& flat);
std::vector<bool> trainable_mask(const ThetaParams& theta);

struct GradAccumulator {
  std::vector<double> dpsi;
  double dh0 = 0.0;
  double dlog_s = 0.0;
  double dlog_l = 0.0;
  double loss = 0.0;
  long samples = 0;
  long correct = 0;

  explicit GradAccumulator(std::size_t psi_size = 0) : dpsi(psi_size, 0.0) {}
  void zero();
  void add(const GradAccumulator& other);
  std::vector<double> flat() const;  // same layout as pack()
};

inline constexpr double kMinProb = 1e-30;

// -log pi(u*), capped at -log(1e-30). Increments *capped when the cap applies.
double nll_loss(const Policy& pi, Control u_star, long* capped = nullptr);

// d(-log pi(u*)) / dQ(u) for the softmin policy pi(u) ~ exp(-Q(u)).
std::array<double, kNumControls> policy_grad_wrt_q(const Policy& pi, Control u_star);

struct StepOutcome {
  QValues q{};
  Policy pi{};
  double loss = 0.0;
  bool correct = false;
  long expansions = 0;
};

// Adds d_u * sum over each control's visitation of dc/dtheta to acc.
// Gradients reach psi and h0 through the tape and (s, l) in log-space.
void step_gradient(const BeliefState& h, const BeliefTape& tape, const PlanResult& plan,
                   State x_t, const std::array<double, kNumControls>& dq,
                   const ThetaParams& theta, GradAccumulator& acc);

struct StepOptions {
  double eps_h = 1.0;
  GradientFlow flow = GradientFlow::closed_and_open;
};

// Plans from x_t under belief h, scores u_star, and (when acc is given)
// accumulates the parameter gradient.
StepOutcome evaluate_step(const BeliefState& h, const BeliefTape* tape, State x_t, State goal,
                          Control u_star, const ThetaParams& theta, const StepOptions& opts,
                          GradAccumulator* acc, long* capped = nullptr);

// Teacher-forced pass over one demonstration: the belief at step t is built
// from the recorded scans 0..t.
GradAccumulator process_demo(const Demonstration& demo, int width, int height,
                             const ThetaParams& theta, const StepOptions& opts, bool with_grad,
                             long* capped = nullptr);

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

inline constexpr double kMinCostGap = 1e-3;

// One bias-corrected Adam update on the trainable entries of the flat
// parameter vector, then s > 0 and l >= s + 1e-3 are enforced.
void adam_step(ThetaParams& theta, const std::vector<double>& grad, const AdamConfig& cfg,
               AdamState& state);

// Closed-loop score of a parameter set, e.g. rollouts on validation maps.
struct RolloutScore {
  double success_rate = 0.0;  // percent
  double traj_diff = 0.0;
};
using RolloutScorer = std::function<RolloutScore(const ThetaParams&)>;

struct TrainConfig {
  AdamConfig adam;
  int epochs = 30;
  int batch_demos = 1;  // demonstrations per update; 0 = whole epoch
  std::uint64_t seed = 1;
  double eps_h = 1.0;
  unsigned threads = 0;
  bool shuffle = true;
  // When set, the best epoch is the one with the highest validation success
  // (then lower traj_diff, then lower val_loss); otherwise the lowest val_loss.
  RolloutScorer rollout_score;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double val_success = -1.0;  // -1 when no scorer is configured
  double val_traj_diff = -1.0;
};

struct TrainResult {
  ThetaParams final_theta;
  ThetaParams best_theta;
  AdamState optimizer;
  std::vector<EpochMetrics> history;
  int best_epoch = -1;
  long capped_losses = 0;
};

struct TrainingData {
  std::vector<Demonstration> train;
  std::vector<Demonstration> val;
  int width = 16;
  int height = 16;
};

// Mean loss and next-control accuracy over every step of every demo.
struct ValidationScore {
  double loss = 0.0;
  double accuracy = 0.0;
  long samples = 0;
};
ValidationScore score_demos(const std::vector<Demonstration>& demos, int width, int height,
                            const ThetaParams& theta, double eps_h, unsigned threads);

// Non-finite losses abort with std::runtime_error naming the sample.
TrainResult train(const TrainingData& data, const ThetaParams& init, const TrainConfig& cfg,
                  const AdamState* resume = nullptr);

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history);

nlohmann::json theta_to_json(const ThetaParams& theta);
ThetaParams theta_from_json(const nlohmann::json& j);

struct Checkpoint {
  ThetaParams theta;
  AdamState optimizer;
  nlohmann::json config = nlohmann::json::object();
  std::string dataset_hash;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

}  // namespace navirl
