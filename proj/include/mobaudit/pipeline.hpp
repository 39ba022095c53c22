#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mobaudit/types.hpp"

// Command orchestration shared by the CLI and the C API: option parsing,
// input loading, output writing, and the run manifest. Every command writes
// its artifacts under the `out` directory and returns a JSON summary.

namespace mobaudit {

struct RunOutcome {
  nlohmann::json summary;
  std::vector<std::string> warnings;
};

// Commands: synth, link, impute, audit:measurement, audit:disparate,
// audit:joint, audit:interaction, policy:rank, policy:allocate, report.
// Unknown commands or option keys are validation errors. Outputs are
// deterministic given identical inputs, options, and seed; the manifest
// timestamp honours SOURCE_DATE_EPOCH.
RunOutcome run_command(const std::string& command,
                       const std::map<std::string, std::string>& options);

// The option keys run_command accepts, for interface layers that validate
// before dispatch.
const std::vector<std::string>& known_option_keys();

}  // namespace mobaudit
