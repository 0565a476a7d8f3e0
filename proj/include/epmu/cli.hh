#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epmu/checker.hh"

namespace epmu {

struct InputDigest {
  std::string role;    // "system", "formula", "game"
  std::string source;  // path, or "inline"
  std::string sha256;
};

/// Structured outcome of one command. Field order in the JSON form is fixed;
/// only statistics.wall_seconds varies between identical runs.
struct Report {
  std::vector<std::string> command;
  std::vector<InputDigest> inputs;
  std::optional<FragmentReport> fragment;
  std::string verdict;  // holds, fails, rejected, accept, reject, error
  std::optional<CheckStats> statistics;
  std::vector<std::string> warnings;
  std::string error;
};

std::string reportToJson(const Report& r);
/// Throws InvalidSystem on malformed input.
Report reportFromJson(const std::string& text);

std::string sha256Hex(const std::string& bytes);

struct CliEnvironment {
  bool color = false;
};

/// Runs one command line (without the program name). Returns the exit code.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const CliEnvironment& env = {});

}  // namespace epmu
