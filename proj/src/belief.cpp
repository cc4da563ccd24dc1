#include "navirl/belief.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace navirl {

void BeliefState::decay_towards(double h0, double gamma) {
  for (auto& v : h_) v = h0 + gamma * (v - h0);
}

BeliefState belief_from_map(const GridMap& map, double confidence) {
  BeliefState h(map.width(), map.height(), 0.0);
  for (int i = 0; i < map.size(); ++i) {
    h[i] = map.cells()[i] == GridMap::kOccupied ? confidence : -confidence;
  }
  return h;
}

BeliefTape::BeliefTape(int cells, int beams)
    : cells_(cells),
      beams_(beams),
      dpsi_(static_cast<std::size_t>(cells) * beams, 0.0),
      in_band_(cells, 0) {}

void BeliefTape::append(std::span<const TapeEntry> entries) {
  step_begin_.push_back(entries_.size());
  for (const auto& e : entries) {
    if (e.cell < 0 || e.cell >= cells_ || e.beam < 0 || e.beam >= beams_) {
      throw std::out_of_range("BeliefTape::append: entry outside tape shape");
    }
    entries_.push_back(e);
    dpsi_[static_cast<std::size_t>(e.cell) * beams_ + e.beam] += e.dz;
    ++in_band_[e.cell];
  }
}

std::span<const TapeEntry> BeliefTape::step_entries(int t) const {
  const std::size_t b = step_begin_.at(t);
  const std::size_t e = t + 1 < steps() ? step_begin_[t + 1] : entries_.size();
  return {entries_.data() + b, e - b};
}

BeliefState BeliefTape::replay(int width, int height, const SensorModelParams& params) const {
  BeliefState h(width, height, params.h0);
  for (int t = 0; t < steps(); ++t) {
    ScanEvidence ev;
    ev.entries.assign(step_entries(t).begin(), step_entries(t).end());
    ev.g = increment_field(h.size(), ev.entries, params);
    update_belief(h, ev, params.h0);
  }
  return h;
}

ScanEvidence inverse_log_odds(int width, int height, State pose, const LidarScan& scan,
                              const SensorModelParams& params) {
  if (pose.x < 0 || pose.y < 0 || pose.x >= width || pose.y >= height) {
    throw std::invalid_argument("inverse_log_odds: pose out of bounds");
  }
  if (!(params.epsilon > 0.0)) throw std::invalid_argument("inverse_log_odds: epsilon must be > 0");
  if (!(params.march_step > 0.0)) throw std::invalid_argument("inverse_log_odds: bad march step");
  const int beams = scan.beams();
  if (params.psi.size() != 1 && static_cast<int>(params.psi.size()) != beams) {
    throw std::invalid_argument("inverse_log_odds: psi size does not match beam count");
  }
  ScanEvidence ev;
  const double ox = pose.x + 0.5;
  const double oy = pose.y + 0.5;
  for (int k = 0; k < beams; ++k) {
    const double z = scan.ranges[k];
    const double angle = beam_angle(k, beams);
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    const double limit = std::min(z + params.epsilon, scan.max_range);
    int last = -1;
    for (int i = 0;; ++i) {
      const double t = i * params.march_step;
      if (t > limit) break;
      const int cx = static_cast<int>(std::floor(ox + t * dx));
      const int cy = static_cast<int>(std::floor(oy + t * dy));
      if (cx < 0 || cy < 0 || cx >= width || cy >= height) break;
      const int cell = cy * width + cx;
      if (cell == last) continue;
      last = cell;
      const double d = std::hypot(cx + 0.5 - ox, cy + 0.5 - oy);
      const double dz = d - z;
      if (dz <= params.epsilon) ev.entries.push_back({cell, k, dz});
    }
  }
  ev.g = increment_field(width * height, ev.entries, params);
  return ev;
}

std::vector<double> increment_field(int cells, std::span<const TapeEntry> entries,
                                    const SensorModelParams& params) {
  std::vector<double> delta(cells, 0.0);
  for (const auto& e : entries) delta[e.cell] += params.weight(e.beam) * e.dz - params.h0;
  for (auto& v : delta) v += params.h0;
  return delta;
}

void update_belief(BeliefState& h, const ScanEvidence& evidence, double h0, BeliefTape* tape) {
  if (static_cast<int>(evidence.g.size()) != h.size()) {
    throw std::invalid_argument("update_belief: increment field does not match lattice");
  }
  auto hv = h.log_odds();
  for (std::size_t j = 0; j < hv.size(); ++j) hv[j] += evidence.g[j] - h0;
  if (tape) tape->append(evidence.entries);
}

std::vector<double> occupancy_prob(const BeliefState& h) {
  std::vector<double> p(h.size());
  for (int j = 0; j < h.size(); ++j) p[j] = sigmoid(h[j]);
  return p;
}

BeliefGrad belief_param_grad(const BeliefTape& tape, int cell) {
  BeliefGrad g;
  if (cell < 0 || cell >= tape.cells()) {
    g.dpsi.assign(tape.beams(), 0.0);
    return g;
  }
  auto d = tape.dpsi(cell);
  g.dpsi.assign(d.begin(), d.end());
  g.dh0 = tape.dh0(cell);
  return g;
}

void write_pgm(std::ostream& out, int width, int height, std::span<const double> values01) {
  out << "P5\n" << width << ' ' << height << "\n255\n";
  for (double v : values01) {
    const double c = std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - c)))));
  }
}

void write_belief_pgm(std::ostream& out, const BeliefState& h) {
  const auto p = occupancy_prob(h);
  write_pgm(out, h.width(), h.height(), p);
}

}  // namespace navirl
