#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "navirl/dataset.hpp"
#include "navirl/eval.hpp"
#include "navirl/sensor.hpp"
#include "navirl/trainer.hpp"

namespace navirl::cli {

// Every recognised key with its default value. Config files and --set
// overrides may only touch keys present here.
nlohmann::json default_config();

// Strict configuration: defaults, then the file (if any), then key=value
// overrides with dotted keys. Unknown keys and type changes throw
// std::invalid_argument.
class RunConfig {
 public:
  RunConfig();
  static RunConfig load(const std::string& path, const std::vector<std::string>& overrides);

  void merge(const nlohmann::json& patch);
  void set(const std::string& dotted_key, const std::string& value);

  const nlohmann::json& data() const { return j_; }

  std::uint64_t seed() const;
  unsigned threads() const;
  std::string out_dir() const;
  std::string dataset_dir() const;

  LidarConfig sensor() const;
  DatasetConfig dataset(const std::string& split) const;
  ThetaParams initial_theta() const;
  TrainConfig train() const;
  RolloutConfig rollout() const;
  BenchConfig bench() const;
  DynaConfig dyna() const;

  // Rejects out-of-range values before any work starts.
  void validate() const;

 private:
  nlohmann::json j_;
};

}  // namespace navirl::cli
