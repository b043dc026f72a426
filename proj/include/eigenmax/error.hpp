#pragma once

#include <stdexcept>
#include <string>

namespace eigenmax {

enum class ErrorCode {
  InvalidTriple,
  InvalidK,
  BadIndex,
  DimensionMismatch,
  NonIntegerGenus,
  InvalidType,
  NotSeparating,
  UnsupportedFamily,
  InfeasibleResolution,
  GluingMismatch,
  NonEquivariantPairing,
  OverlappingDisks,
  NonPositiveDensity,
  NonInvariantDensity,
  DegenerateTriangle,
  NoConvergence,
  SingularMass,
  NoBoundary,
  AllDirichlet,
  NotInvolution,
  NonCommuting,
  ClusterAmbiguous,
  StalledBelowTolerance,
  BoundViolation,
  Stalled,
  NoBalancedMember,
  EmptyCluster,
  WrongParitySplit,
  NotEven,
  NodalCountNotTwo,
  PoleOnSurface,
  IOError,
  ParseError,
};

const char* error_name(ErrorCode c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Verbosity from EIGENMAX_LOG (0 silent, 1 info, 2 debug).
int log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

// Worker thread cap for internal parallelism; 0 means hardware concurrency.
void set_max_jobs(int jobs);
int max_jobs();

}  // namespace eigenmax
