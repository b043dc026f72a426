#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eigenmax/fem.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

enum class GLTarget { Closed, FreeBoundary };

// Orthogonal matrices rho(g), one per group element, acting on the target by u(g v) = rho(g) u(v).
struct Representation {
  std::vector<Eigen::MatrixXd> mats;
  int dim() const { return mats.empty() ? 0 : static_cast<int>(mats[0].rows()); }
  bool empty() const { return mats.empty(); }
};

Representation trivial_representation(const SymmetricMesh& m, int dim);
// Least-squares rho(g) fitted to an equivariant map in the weighted norm, made orthogonal, and
// snapped to exact entries in {-1, 0, 1} when every entry is within 1e-6 of one.
Representation fitted_representation(const SymmetricMesh& m, const Eigen::MatrixXd& u, const Eigen::VectorXd& weights);
// Orthonormal basis of vectors fixed by every rho(g).
Eigen::MatrixXd fixed_subspace(const Representation& rep);
// (1/|G|) sum over g of rho(g)^T u(g v).
Eigen::MatrixXd average_equivariant(const SymmetricMesh& m, const Representation& rep, const Eigen::MatrixXd& u);
// max over g, v of |u(g v) - rho(g) u(v)|.
double equivariance_defect(const SymmetricMesh& m, const Representation& rep, const Eigen::MatrixXd& u);

struct GLState {
  Eigen::MatrixXd u;  // one row per vertex, one column per target coordinate
  double eps = 1.0;
  GLTarget target = GLTarget::Closed;
  Representation rep;  // empty means no symmetry constraint

  nlohmann::json to_json() const;
  static GLState from_json(const nlohmann::json& j);
};

// Weights of the penalty term: lumped area mass (closed) or lumped outer boundary mass.
Eigen::VectorXd gl_weights(const SymmetricMesh& m, GLTarget target);

// Closed: sum over components of u^T K u / 2 plus sum M (1 - |u|^2)^2 / (4 eps^2).
double gl_energy(const GLState& s, const SymmetricMesh& m);
// Free boundary: Dirichlet part plus sum B (1 - |u|^2)^2 / (4 eps) over the outer boundary.
double fb_gl_energy(const GLState& s, const SymmetricMesh& m);
// Dispatches on s.target.
double energy(const GLState& s, const SymmetricMesh& m);

// Derivative of the energy with respect to the vertex values.
Eigen::MatrixXd gl_gradient(const GLState& s, const SymmetricMesh& m);
// sqrt(sum_v |g_v|^2 / W_v) with W the area mass, plus the boundary mass for free-boundary targets.
double gl_residual(const GLState& s, const SymmetricMesh& m);

// Area of the induced metric with density (1 - |u|^2) / eps^2 (closed), or length with
// density (1 - |u|^2) / eps on the outer boundary (free boundary).
double induced_area(const GLState& s, const SymmetricMesh& m);
double max_norm(const GLState& s);

struct GLDescentOptions {
  double tol = 1e-10;  // residual
  int max_iters = 200;
  int line_search_levels = 30;
  int check_every = 50;  // iterations between equivariance checks
};

struct GLDescentRecord {
  int iter = 0;
  double energy = 0.0;
  double residual = 0.0;
  bool newton = false;
};

struct GLDescentResult {
  GLState state;
  std::vector<GLDescentRecord> history;
  double max_equivariance_defect = 0.0;  // over the periodic checks
  bool converged = false;
};

// Newton steps on the energy when the Hessian is positive definite, preconditioned gradient steps
// otherwise, with an energy line search. Every iterate is averaged onto the equivariant maps.
// Throws Stalled when no step decreases the energy above the residual tolerance.
GLDescentResult gl_descent(const GLState& initial, const SymmetricMesh& m, const GLDescentOptions& opts = {});

struct GLContinuationResult {
  std::vector<GLDescentResult> stages;
  std::vector<double> density_change;  // relative L1 change of the induced density per stage
  bool stabilized = false;
};
// Warm-started descents along the eps schedule, stopping once the induced density changes by less
// than `density_tol` relative in L1.
GLContinuationResult gl_continuation(const GLState& initial, const SymmetricMesh& m, const std::vector<double>& eps,
                                     const GLDescentOptions& opts = {}, double density_tol = 1e-3);
// 1, 1/2, 1/4, ... with `count` entries.
std::vector<double> halving_schedule(int count);

// G_a(x) = (1 - |a|^2) / |x + a|^2 (x + a) + a applied per row; the constant a when |a| = 1.
Eigen::MatrixXd sweepout(const Eigen::MatrixXd& u0, const Eigen::VectorXd& a);

// Energies of sweepout members for each row of `params` (coordinates in the fixed subspace basis F).
std::vector<double> sweepout_energies(const SymmetricMesh& m, const Eigen::MatrixXd& u0, const Eigen::MatrixXd& F,
                                      const std::vector<Eigen::VectorXd>& params, GLTarget target, double eps);

struct BalancedMember {
  Eigen::VectorXd a;  // in target coordinates
  Eigen::MatrixXd u;
  double imbalance = 0.0;  // |sum W u|
  int iterations = 0;
  std::string method;  // "bisection" or "newton"
};
// Member of the sweepout over the unit ball of the fixed subspace whose weighted average vanishes.
// Throws NoBalancedMember when |sum W u| stays above rel_tol times the total weight.
BalancedMember balanced_member(const SymmetricMesh& m, const Eigen::MatrixXd& u0, const Representation& rep,
                               GLTarget target, int grid = 8, double rel_tol = 1e-4);

struct HerschReport {
  GLTarget target = GLTarget::Closed;
  double eps = 0.0;
  double energy = 0.0;
  double normalized_first = 0.0;  // area times lambda_1, or length times sigma_1
  double imbalance = 0.0;         // |sum W u| / sum W
  double first = 0.0;             // lambda_1 or sigma_1 of the mesh as given
  double lhs = 0.0;               // (2 + eps) E (closed) or 2 F (free boundary)
  double rhs = 0.0;               // (1 - eps) normalized_first, or normalized_first
  // Closed: (2 + eps lambda_1) E - (1 - eps) normalized_first, valid at every scale.
  // Free boundary: 2F - normalized_first + 2 sigma_1 sqrt(eps L F).
  double slack = 0.0;
  double literal_slack = 0.0;     // lhs - rhs; equals slack in the closed case when lambda_1 = 1
  double fitted_c = 0.0;          // smallest C with 2 E >= (1 - C eps) normalized_first
  std::optional<Eigen::VectorXd> balanced_parameter;

  bool holds(double tol = 1e-8) const { return slack >= -tol; }
  nlohmann::json to_json() const;
};

HerschReport hersch_bound_check(const GLState& s, const SymmetricMesh& m, const SolverOptions& solver = {});
// Same mesh with the density scaled so that the first nonzero eigenvalue of the given kind is 1.
SymmetricMesh unit_first_eigenvalue(const SymmetricMesh& m, ProblemKind kind, const SolverOptions& solver = {});
// Finds the balanced member of the sweepout of u0 and checks it at the given eps.
HerschReport hersch_bound_check(const SymmetricMesh& m, const Eigen::MatrixXd& u0, const Representation& rep,
                                GLTarget target, double eps, const SolverOptions& solver = {});

}  // namespace eigenmax
