#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "eigenmax/mesh.hpp"

namespace eigenmax {

using SpMat = Eigen::SparseMatrix<double>;

// Cotangent stiffness of the reference metric; independent of the density.
SpMat assemble_stiffness(const SymmetricMesh& m);
// Lumped mass: rho_v / 3 * sum of adjacent reference triangle areas.
Eigen::VectorXd mass_diagonal(const SymmetricMesh& m);
SpMat assemble_mass(const SymmetricMesh& m);
// Lumped boundary mass: sqrt(rho_v) / 2 * sum of adjacent boundary edge lengths on the given panels.
Eigen::VectorXd boundary_mass_diagonal(const SymmetricMesh& m, const std::vector<PanelLabel>& panels);
SpMat assemble_boundary_mass(const SymmetricMesh& m, const std::vector<PanelLabel>& panels);

enum class ProblemKind { Laplace, Steklov };
enum class BC { Neumann, Dirichlet, Steklov };

struct BoundaryConditionMap {
  std::map<std::string, BC> by_label;  // keys are PanelLabel::str()
  BC fallback = BC::Neumann;

  BC of(const PanelLabel& l) const;
  bool has(BC bc) const;
  // Outer panels Steklov for the Steklov problem, everything else Neumann.
  static BoundaryConditionMap for_kind(ProblemKind kind);
  // "outer=steklov,free=neumann,mirror:1=dirichlet"
  static BoundaryConditionMap parse(const std::string& s);
  std::string str() const;
};

struct SolverOptions {
  double tol = 1e-9;  // relative residual |Kx - t Mx| / (|Kx| + |t| |Mx|)
  int max_iters = 500;
  std::uint64_t seed = 1;
  const Eigen::MatrixXd* warm_start = nullptr;  // optional columns seeding the block
  int dense_threshold = 400;                    // dense Laplace solve up to this many unknowns
  int schur_threshold = 800;                    // dense Dirichlet-to-Neumann solve up to this many Steklov vertices
};

struct Spectrum {
  ProblemKind kind = ProblemKind::Laplace;
  std::vector<double> eigenvalues;  // ascending; kernel modes first
  Eigen::MatrixXd eigenvectors;     // columns over all vertices, orthonormal in the mass pencil
  int zero_modes = 0;
  double cluster_tolerance = 1e-3;
  double normalizer = 1.0;  // area (Laplace) or Steklov boundary length
  std::vector<double> residuals;
  int iterations = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double first_nonzero() const;
  double normalized_first() const { return normalizer * first_nonzero(); }
  // Groups of indices with relative gaps at most cluster_tolerance; kernel modes form their own group.
  std::vector<std::vector<int>> clusters() const;
  std::vector<int> first_cluster() const;  // first cluster after the kernel
  nlohmann::json to_json() const;
};

// Lowest `count` eigenpairs of K x = t M x (count is clamped to the dimension).
Spectrum solve_generalized(const SpMat& K, const SpMat& M, int count, const SolverOptions& opts = {});

// `count` is the number of nonzero eigenvalues requested; kernel modes are returned in addition.
Spectrum laplace_spectrum(const SymmetricMesh& m, int count, const SolverOptions& opts = {},
                          const BoundaryConditionMap& bc = BoundaryConditionMap::for_kind(ProblemKind::Laplace));
Spectrum steklov_spectrum(const SymmetricMesh& m, int count, const SolverOptions& opts = {});
Spectrum mixed_spectrum(const SymmetricMesh& m, const BoundaryConditionMap& bc, int count,
                        const SolverOptions& opts = {});

// Discrete problem after eliminating Dirichlet vertices: K u = t diag(mass) u on the unknowns.
struct ReducedPencil {
  ProblemKind kind = ProblemKind::Laplace;
  SpMat K;
  Eigen::VectorXd mass;    // lumped area or boundary mass
  Eigen::MatrixXd kernel;  // mass-orthonormal basis of the kernel of K
  SpMat expand;            // unknowns to vertex values
  double normalizer = 1.0;
};
ReducedPencil reduce_problem(const SymmetricMesh& m, const BoundaryConditionMap& bc);
// Kernel modes first as exact zeros, then `count` nonzero eigenpairs; eigenvectors pass through `expand`.
Spectrum solve_reduced(const ReducedPencil& p, int count, const SolverOptions& opts = {});

double normalized_first(const SymmetricMesh& m, ProblemKind kind, const SolverOptions& opts = {});

struct HarmonicExtension {
  Eigen::VectorXd u;
  double energy = 0.0;  // u^T K u
};
// Discrete harmonic extension with u = values on `vertices`, natural conditions elsewhere.
HarmonicExtension harmonic_extension(const SymmetricMesh& m, const std::vector<int>& vertices,
                                     const Eigen::VectorXd& values);
double dirichlet_energy(const SymmetricMesh& m, const Eigen::VectorXd& u);

}  // namespace eigenmax
