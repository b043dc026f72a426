#include "eigenmax/error.hpp"

#include <cstdlib>
#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

namespace eigenmax {

const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidTriple: return "InvalidTriple";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonIntegerGenus: return "NonIntegerGenus";
    case ErrorCode::InvalidType: return "InvalidType";
    case ErrorCode::NotSeparating: return "NotSeparating";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::InfeasibleResolution: return "InfeasibleResolution";
    case ErrorCode::GluingMismatch: return "GluingMismatch";
    case ErrorCode::NonEquivariantPairing: return "NonEquivariantPairing";
    case ErrorCode::OverlappingDisks: return "OverlappingDisks";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::NonInvariantDensity: return "NonInvariantDensity";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularMass: return "SingularMass";
    case ErrorCode::NoBoundary: return "NoBoundary";
    case ErrorCode::AllDirichlet: return "AllDirichlet";
    case ErrorCode::NotInvolution: return "NotInvolution";
    case ErrorCode::NonCommuting: return "NonCommuting";
    case ErrorCode::ClusterAmbiguous: return "ClusterAmbiguous";
    case ErrorCode::StalledBelowTolerance: return "StalledBelowTolerance";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::NoBalancedMember: return "NoBalancedMember";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::WrongParitySplit: return "WrongParitySplit";
    case ErrorCode::NotEven: return "NotEven";
    case ErrorCode::NodalCountNotTwo: return "NodalCountNotTwo";
    case ErrorCode::PoleOnSurface: return "PoleOnSurface";
    case ErrorCode::IOError: return "IOError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("EIGENMAX_LOG");
    if (!env) return 0;
    std::string s(env);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    try {
      return std::stoi(s);
    } catch (...) {
      return 0;
    }
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[eigenmax] " << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[eigenmax:debug] " << msg << '\n';
}

namespace {
std::atomic<int> g_max_jobs{0};
}

void set_max_jobs(int jobs) { g_max_jobs = std::max(0, jobs); }

int max_jobs() {
  const int j = g_max_jobs;
  return j > 0 ? j : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace eigenmax
