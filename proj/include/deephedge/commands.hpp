#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deephedge/config.hpp"

namespace dh {

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed_data;
  std::optional<std::uint64_t> seed_init;
  std::vector<std::filesystem::path> checkpoints;
  std::optional<std::string> mode;
};

/// Loads the configuration, applies seed overrides, writes effective_config.yaml
/// into the output directory and returns the config with its digest.
RunConfig prepare_run(const CommandOptions& opts, std::string& digest);

void cmd_simulate(const CommandOptions& opts, std::ostream& log);
void cmd_train(const CommandOptions& opts, std::ostream& log);
void cmd_evaluate(const CommandOptions& opts, std::ostream& log);
void cmd_robustness(const CommandOptions& opts, std::ostream& log);
void cmd_equinox(const CommandOptions& opts, std::ostream& log);

/// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 numeric failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dh
