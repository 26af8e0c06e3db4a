#pragma once

#include "slowfast/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace slowfast::scenario {

using Json = nlohmann::ordered_json;

// Raised on malformed scenario files; the message names the offending field.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  std::string out_dir;          // empty: resolve via default_out_dir()
  double slack_override = -1.0; // fraction, e.g. 0.05; negative keeps the file value
  std::uint64_t seed = 1;
};

// SLOWFAST_OUT_DIR when set, otherwise "slowfast-out".
std::string default_out_dir();

struct Outcome {
  int exit_code = 0;  // 0 pass, 1 verification failure, 2 validation, 3 numerical
  Json report;
};

// Runs a scenario given as a file path or the name of a built-in preset;
// writes trajectories.csv, envelopes.csv and report.json into the output
// directory. Validation problems throw ValidationError (exit code 2 at the
// CLI); everything else is reported through the exit code.
Outcome run_file(const std::string& path_or_preset, const RunOptions& options);

Outcome run_json(const Json& j, const RunOptions& options);

// Stable listing of built-in scenario presets and nonlinear field presets.
std::string list_presets();

const std::map<std::string, std::string>& builtin_scenarios();

// Schema check used by the round-trip tests; throws ValidationError.
void validate_report(const Json& report);

}  // namespace slowfast::scenario
