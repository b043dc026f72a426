#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eigenmax/fem.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

// A sign per commuting involution of the action, e.g. {tau: +, r2: -}.
struct ParityLabel {
  std::vector<std::string> involutions;  // element names understood by GroupAction::find
  std::vector<int> signs;                // +1 even, -1 odd

  std::string sign_string() const;  // "+-"
  static ParityLabel make(const std::vector<std::string>& involutions, const std::string& signs);
  // Every sign pattern over the given involutions, in lexicographic order of sign strings.
  static std::vector<ParityLabel> all(const std::vector<std::string>& involutions);
};

// (1/|G|) sum over g of f o g.
Eigen::VectorXd average_invariant(const SymmetricMesh& m, const Eigen::VectorXd& f);

// Throws NotInvolution or NonCommuting; returns the element indices.
std::vector<int> check_label(const SymmetricMesh& m, const ParityLabel& label);

enum class ReductionRoute { Auto, Projection, HalfMesh };

// Restriction of the problem to functions with the given parities, in orbit coordinates.
ReducedPencil sector_pencil(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc);

// Fundamental domain of the subgroup generated by the label's involutions, cut along the mirror
// edges, with Neumann on even mirrors and Dirichlet on odd ones. Empty if the mirror edges do
// not cut the surface into fundamental domains.
struct HalfMesh {
  SymmetricMesh mesh;
  BoundaryConditionMap bc;
  std::vector<int> parent_vertex;
};
std::optional<HalfMesh> half_mesh(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc);

// Spectrum of the sector; eigenvectors are vertex fields on the full mesh for the projection route
// and on the half mesh otherwise. Normalizer is that of the full problem.
Spectrum labeled_spectrum(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc, int count,
                          const SolverOptions& opts = {}, ReductionRoute route = ReductionRoute::Auto);
// First nonzero eigenvalue in the sector.
double labeled_first(const SymmetricMesh& m, const ParityLabel& label, ProblemKind kind, const SolverOptions& opts = {},
                     ReductionRoute route = ReductionRoute::Auto);

// Even and odd spectra for one involution (kernel modes included).
std::pair<Spectrum, Spectrum> parity_split_spectrum(const SymmetricMesh& m, const std::string& involution, int count,
                                                    ProblemKind kind, const SolverOptions& opts = {});

struct ClusterParity {
  int dimension = 0;
  int even = 0;
  int odd = 0;
  int mixed = 0;  // directions whose parity overlap stays below the threshold
};
// Dimension of cluster `cluster` of sp.clusters() and its parity breakdown under `involution`.
ClusterParity invariant_multiplicity(const Spectrum& sp, const SymmetricMesh& m, int cluster,
                                     const std::string& involution, double threshold = 0.99);

// All sign sectors solved in parallel, keyed by sign strings.
nlohmann::json labeled_spectra_json(const SymmetricMesh& m, const std::vector<std::string>& involutions,
                                    ProblemKind kind, int count, const SolverOptions& opts = {});

}  // namespace eigenmax
