#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>

#include "eigenmax/mesh.hpp"

namespace eigenmax {

struct RunConfig {
  std::string command;
  // "builtin:<name>[:params][:level]", a mesh or descriptor JSON file, or inline descriptor JSON.
  std::string source;
  int resolution = 2000;  // target vertex count for descriptors and builtins without a level
  std::string kind = "laplace";  // laplace | steklov | mixed
  std::string bc;                // panel=cond list for mixed problems; "mixed" selects the default
  int count = 10;
  double tol = 5e-3;
  int max_iters = 60;
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string out;  // output directory; empty writes nothing
  int depth = 1;
  std::string mode = "elementary";  // elementary | all-cases
  bool gap = false;                 // optimize elementary degenerations for a gap report

  nlohmann::json to_json() const;
};

struct CommandResult {
  int exit_code = 0;  // 0 success, 1 usage or IO, 2 validation failure
  nlohmann::json report;
};

CommandResult cmd_classify(const RunConfig& cfg);
CommandResult cmd_degenerations(const RunConfig& cfg);
CommandResult cmd_spectrum(const RunConfig& cfg);
CommandResult cmd_optimize(const RunConfig& cfg);
CommandResult cmd_verify(const RunConfig& cfg);  // source is the bundle directory

// Mesh named by a source string; descriptors use cfg.resolution as the vertex target.
SymmetricMesh load_source(const RunConfig& cfg);

// 64-bit FNV-1a of a file, as 16 hex digits; IOError when unreadable.
std::string file_digest(const std::string& path);

// Parses arguments, runs the command, prints its JSON report and returns the exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace eigenmax
