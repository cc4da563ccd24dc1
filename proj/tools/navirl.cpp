#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navirl/cli/commands.hpp"
#include "navirl/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cost learning from demonstrations with differentiable backward A*"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  int threads = -1;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "Override a config key: section.key=value")->take_all();
  app.add_option("-o,--out", out, "Output directory (same as --set out=DIR)");
  app.add_option("--threads", threads, "Worker threads, 0 = machine parallelism");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "Generate maps and expert demonstrations"},
      {"train", "Learn cost parameters from a dataset"},
      {"eval", "Roll out the learned policy on the test split"},
      {"bench", "Compare backward A* against full dynamic programming"},
      {"dyna", "Run the blocking-maze adaptation scenario"},
      {"render", "Dump belief and value-field PGM snapshots of one rollout"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  navirl::cli::RunConfig cfg;
  try {
    cfg = navirl::cli::RunConfig::load(config_path, overrides);
    if (!out.empty()) cfg.set("out", "\"" + out + "\"");
    if (threads >= 0) cfg.set("threads", std::to_string(threads));
  } catch (const navirl::MissingInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return navirl::cli::kMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return navirl::cli::kInternal;
  }
  return navirl::cli::run_command(command, cfg, std::cout, std::cerr);
}
