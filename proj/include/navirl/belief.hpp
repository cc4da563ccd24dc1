#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "navirl/grid.hpp"
#include "navirl/sensor.hpp"

namespace navirl {

// Numerically stable logistic function.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Parameters of the truncated-sigmoid inverse sensor model. psi holds one
// weight per beam, or a single weight shared by all beams.
struct SensorModelParams {
  std::vector<double> psi = std::vector<double>(72, 1.0);
  double h0 = 0.0;
  double epsilon = 1.0;
  double march_step = 0.3;

  double weight(int beam) const { return psi.size() == 1 ? psi[0] : psi[beam]; }
  int weight_index(int beam) const { return psi.size() == 1 ? 0 : beam; }
};

// Occupancy log-odds per cell.
class BeliefState {
 public:
  BeliefState() = default;
  BeliefState(int width, int height, double h0)
      : width_(width), height_(height), h_(static_cast<std::size_t>(width) * height, h0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return static_cast<int>(h_.size()); }
  int index(State s) const { return s.y * width_ + s.x; }

  double operator[](int cell) const { return h_[cell]; }
  double& operator[](int cell) { return h_[cell]; }
  double at(State s) const { return h_[index(s)]; }

  std::span<const double> log_odds() const { return h_; }
  std::span<double> log_odds() { return h_; }

  // h <- h0 + gamma (h - h0)
  void decay_towards(double h0, double gamma);

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> h_;
};

// Log-odds belief with every cell pinned to +/-confidence from the true map.
BeliefState belief_from_map(const GridMap& map, double confidence);

// One (cell, beam) association inside the influence band of a beam.
struct TapeEntry {
  int cell = 0;
  int beam = 0;
  double dz = 0.0;  // distance to cell center minus measured range
};

// Output of the inverse sensor model for one scan. g[j] equals h0 for cells
// no beam influences; otherwise h0 plus the sum over beams of (psi_k dz - h0).
struct ScanEvidence {
  std::vector<double> g;
  std::vector<TapeEntry> entries;
};

// Records every in-band association so that derivatives of the log-odds with
// respect to psi and h0 can be read off without re-running the filter.
class BeliefTape {
 public:
  BeliefTape() = default;
  BeliefTape(int cells, int beams);

  void append(std::span<const TapeEntry> entries);
  int steps() const { return static_cast<int>(step_begin_.size()); }
  int cells() const { return cells_; }
  int beams() const { return beams_; }

  std::span<const TapeEntry> step_entries(int t) const;

  // d h[cell] / d psi_k, indexed by beam.
  std::span<const double> dpsi(int cell) const {
    return {dpsi_.data() + static_cast<std::size_t>(cell) * beams_,
            static_cast<std::size_t>(beams_)};
  }
  double dh0(int cell) const { return 1.0 - static_cast<double>(in_band_[cell]); }

  // Rebuilds h_t by re-applying every recorded step from the prior.
  BeliefState replay(int width, int height, const SensorModelParams& params) const;

 private:
  int cells_ = 0;
  int beams_ = 0;
  std::vector<TapeEntry> entries_;
  std::vector<std::size_t> step_begin_;
  std::vector<double> dpsi_;
  std::vector<int> in_band_;
};

// Associates cells with beams by marching each ray in fixed steps up to
// min(range + epsilon, max_range) and keeps cells with dz <= epsilon.
ScanEvidence inverse_log_odds(int width, int height, State pose, const LidarScan& scan,
                              const SensorModelParams& params);

// Per-cell increment field from in-band entries.
std::vector<double> increment_field(int cells, std::span<const TapeEntry> entries,
                                    const SensorModelParams& params);

// h <- h + (g - h0), appending to the tape when one is given.
void update_belief(BeliefState& h, const ScanEvidence& evidence, double h0,
                   BeliefTape* tape = nullptr);

inline void observe_and_update(BeliefState& h, State pose, const LidarScan& scan,
                               const SensorModelParams& params, BeliefTape* tape = nullptr) {
  update_belief(h, inverse_log_odds(h.width(), h.height(), pose, scan, params), params.h0, tape);
}

std::vector<double> occupancy_prob(const BeliefState& h);

struct BeliefGrad {
  std::vector<double> dpsi;  // per beam
  double dh0 = 1.0;
};

BeliefGrad belief_param_grad(const BeliefTape& tape, int cell);

// Binary PGM (P5) with p = 1 rendered black.
void write_pgm(std::ostream& out, int width, int height, std::span<const double> values01);
void write_belief_pgm(std::ostream& out, const BeliefState& h);

}  // namespace navirl
