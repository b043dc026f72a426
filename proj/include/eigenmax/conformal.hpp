#pragma once

#include <Eigen/Dense>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eigenmax/fem.hpp"
#include "eigenmax/mesh.hpp"
#include "eigenmax/taxonomy.hpp"

namespace eigenmax {

// Derivative of the normalized first eigenvalue along an invariant density change.
// member < 0 selects the first nonzero eigenvalue and requires it to be simple (else ClusterAmbiguous).
double eigenvalue_derivative(const SymmetricMesh& m, const Spectrum& sp, const Eigen::VectorXd& delta, int member = -1);

// Nonnegative weights w with sum w = w.size() making sum w_i f_i closest to a constant in the
// q-weighted least-squares sense. Columns of F are the f_i.
Eigen::VectorXd flattening_weights(const Eigen::MatrixXd& F, const Eigen::VectorXd& q);

// Flattest sum w_i v_i^2 over rotations v = U R of a cluster basis, with w >= 0 and sum w = U.cols().
struct ClusterFlattening {
  Eigen::MatrixXd basis;  // rotated basis v_i
  Eigen::VectorXd weights;
  double residual = 0.0;  // extremality residual of the flattened sum
};
ClusterFlattening flatten_cluster(const SymmetricMesh& m, ProblemKind kind, const Eigen::MatrixXd& U);

struct OptimizerOptions {
  int max_iters = 60;
  double tol = 5e-3;                // extremality residual at which the ascent stops
  double cluster_tolerance = 1e-3;  // relative gap joining eigenvalues into the reported first cluster
  double window = 5e-2;             // eigenvalues this close to the minimum enter the ascent model
  double initial_radius = 0.1;      // trust radius of the log-density step in the mass norm
  double max_radius = 1.0;
  int line_search_levels = 8;       // radius halvings tried before the ascent counts as stalled
  double floor = 1e-6;              // density floor relative to the mean
  double guard = 0.0;               // abort when the objective reaches this value; 0 disables
  SolverOptions solver;
};

struct IterationRecord {
  int iter = 0;
  double objective = 0.0;
  double residual = 0.0;
  int cluster = 0;
  double step = 0.0;
};

struct OptimizationState {
  ProblemKind kind = ProblemKind::Laplace;
  std::vector<double> density;
  double objective = 0.0;
  double residual = 0.0;
  Eigen::MatrixXd cluster_basis;  // mass-orthonormal columns over all vertices
  std::vector<double> cluster_values;
  Eigen::VectorXd weights;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool stalled = false;  // ascent stopped above the residual tolerance
  int floor_hits = 0;    // vertices held at the density floor in the final state

  nlohmann::json to_json() const;  // without density and basis
};

// Extremality residual |sum w_i u_i^2 - c|_inf / c with c the mean, over the surface or the Steklov boundary.
double extremality_residual(const SymmetricMesh& m, ProblemKind kind, const Eigen::MatrixXd& basis,
                            const Eigen::VectorXd& weights);

// 16 pi for closed reflection-surface meshes, 4 pi for bounded ones, 0 when the descriptor is unknown.
double brs_guard(const SymmetricMesh& m);

OptimizationState maximize(const SymmetricMesh& m, ProblemKind kind, const OptimizerOptions& opts = {});

struct SweepResult {
  std::vector<double> params;
  std::vector<OptimizationState> states;
  int best = 0;
  nlohmann::json to_json() const;
};
SweepResult moduli_sweep(const std::vector<double>& params, const std::function<SymmetricMesh(double)>& family,
                         ProblemKind kind, const OptimizerOptions& opts = {});

// Invariant-curve flags of a descriptor: a hole of the chamber fixed by the whole group yields a
// single invariant fixed oval.
struct CurveFlags {
  bool two_sided = false;
  bool one_sided = false;
};
CurveFlags invariant_curve_flags(const SurfaceDescriptor& d);

struct GapChild {
  std::string descriptor;
  double value = 0.0;
  int vertices = 0;
};

struct GapReport {
  std::string parent;
  ProblemKind kind = ProblemKind::Laplace;
  double value = 0.0;
  int vertices = 0;
  CurveFlags flags;
  std::vector<GapChild> children;
  double margin = 0.01;  // relative
  std::vector<std::string> warnings;

  std::vector<double> thresholds() const;  // 8 pi / 12 pi (closed) or 2 pi (bounded) per flag
  double comparison() const;               // max over children and thresholds
  std::string verdict() const;             // "strict", "equality", "violated", "inconclusive"
  nlohmann::json to_json() const;
};

GapReport gap_report(const SurfaceDescriptor& parent, double value, int vertices, const std::vector<GapChild>& children,
                     double margin = 0.01);

}  // namespace eigenmax
