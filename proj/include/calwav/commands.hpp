#pragma once

#include <string>

#include "calwav/config.hpp"
#include "json.hpp"

namespace calwav {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitInconclusive = 2,
  kExitNoAdmissible = 3,
  kExitNotWeaklyAdmissible = 4,
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string message;
  nlohmann::json report = nlohmann::json::object();
};

CommandResult cmd_group_info(const JobConfig& cfg);
CommandResult cmd_classify(const JobConfig& cfg);
CommandResult cmd_synthesize(const JobConfig& cfg);
CommandResult cmd_orbits(const JobConfig& cfg);
CommandResult cmd_disintegrate(const JobConfig& cfg);
CommandResult cmd_roundtrip(const JobConfig& cfg);
CommandResult cmd_sl2z_demo(const JobConfig& cfg);

/// Dispatches by subcommand name and maps exceptions to exit codes
/// (ConfigError and I/O failures give 1).
CommandResult run_command(const std::string& name, const JobConfig& cfg);

}  // namespace calwav
