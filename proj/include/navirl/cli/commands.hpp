#pragma once

#include <iosfwd>
#include <string>

#include "navirl/cli/config.hpp"

namespace navirl::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kMissingInput = 2, kIntegrity = 3 };

// Each command writes its outputs, the effective config, and a manifest.json
// into cfg.out_dir(); `log` receives a human-readable summary.
int cmd_gen(const RunConfig& cfg, std::ostream& log);
int cmd_train(const RunConfig& cfg, std::ostream& log);
int cmd_eval(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const RunConfig& cfg, std::ostream& log);
int cmd_dyna(const RunConfig& cfg, std::ostream& log);
int cmd_render(const RunConfig& cfg, std::ostream& log);

// Runs `command` and maps exceptions onto exit codes.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log,
                std::ostream& err);

// Combined fingerprint of the train and val splits of a dataset directory.
std::string dataset_hash(const std::string& dir);

}  // namespace navirl::cli
