#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eigenmax/fem.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

struct Eigenmap {
  ProblemKind kind = ProblemKind::Laplace;
  Eigen::MatrixXd basis;       // mass-orthonormal first-cluster functions, parity adapted
  Eigen::VectorXd weights;     // flattening weights of the basis, summing to the cluster dimension
  Eigen::MatrixXd components;  // basis * diag(sqrt(weights)) * scale
  std::vector<int> parity;     // +1 even, -1 odd, 0 without an involution
  std::vector<double> eigenvalues;  // Rayleigh quotient of each basis function
  Eigen::MatrixXd gram;        // flattening matrix in the solver basis
  Eigen::VectorXd norm;        // |Phi| per vertex
  double scale = 1.0;
  std::string involution;

  int dim() const { return static_cast<int>(components.cols()); }
  int even() const;
  int odd() const;
};

// Map by the first cluster, rescaled so sum of squares has unit mean over the surface (closed) or
// the outer boundary (Steklov). With an involution, even components come first, then odd ones.
Eigenmap first_eigenmap(const SymmetricMesh& m, const Spectrum& sp, const std::string& involution = "");

// max | |Phi| - 1 | over the surface (closed) or the outer boundary (Steklov).
double norm_deviation(const Eigenmap& map, const SymmetricMesh& m);

// Area-weighted relative Frobenius deviation of the per-triangle pullback metric from alpha g,
// with g the reference metric times the mean triangle density and alpha the best single factor.
// With pointwise set, alpha varies per triangle (free-boundary maps are conformal with a varying factor).
double conformality_residual(const Eigen::MatrixXd& components, const SymmetricMesh& m, bool pointwise = false);

// 1/2 sum over components of u^T K u.
double mapped_area(const Eigen::MatrixXd& components, const SymmetricMesh& m);

struct AreaBound {
  double area = 0.0;
  double bound = 0.0;  // 8 pi closed, 2 pi bounded
  bool strict = false;
  std::optional<double> lawson_reference;  // 8 pi (1 - log 2 / (2 genus)) for genus >= 1
  nlohmann::json to_json() const;
};
AreaBound area_bound_check(const Eigen::MatrixXd& components, const SymmetricMesh& m, bool closed, int genus = -1);

// Components of {u > 0} and {u < 0} over the vertex-edge graph; |u| < 1e-10 max|u| counts as nodal.
int nodal_domain_count(const Eigen::VectorXd& u, const SymmetricMesh& m);

// Vertices fixed by the named involution.
std::vector<int> fixed_vertices(const SymmetricMesh& m, const std::string& involution);

// True when no edge joins strictly positive and strictly negative values and every nodal vertex is fixed.
bool odd_nodal_on_fixed_set(const Eigen::VectorXd& u, const SymmetricMesh& m, const std::string& involution);

struct SheetReport {
  std::string target;  // "sphere" (three even components) or "disk" (two)
  int probes = 0;       // covered probes away from the fixed-set image
  std::vector<int> histogram;  // probes by sheet count
  double doubled_fraction = 0.0;
  bool fixed_set_one_sheeted = false;
  bool ovals_convex = false;  // soft check
  int branch_triangles = 0;
  bool doubling = false;
  nlohmann::json to_json() const;
};
// Projects the even components to the unit sphere (three) or the plane (two) and counts sheets over
// probe points. Requires exactly one odd component (else WrongParitySplit).
SheetReport doubling_projection_check(const Eigenmap& map, const SymmetricMesh& m, int probes = 4000);

struct MorseReport {
  std::vector<int> critical;   // interior critical vertices
  int interior_off_fixed = 0;  // critical interior vertices not fixed by the involution
  std::vector<int> per_oval;   // critical vertices on each oval
  int ovals = 0;
  int boundary_min_nonpositive = 0;
  int boundary_max_nonpositive = 0;
  int euler = 0;
  bool inequality = false;  // N + chi <= |B_min| - |B_max|
  bool graph_structure = false;  // no interior critical points off the fixed set, two per oval
  nlohmann::json to_json() const;
};
// Gradient cone test at interior vertices: zero lies in the convex hull of the incident triangle
// gradients after unfolding the one-ring to a flat cone.
bool is_critical_vertex(const Eigen::VectorXd& u, const SymmetricMesh& m, int v);
// Throws NotEven when u is not even under the involution and NodalCountNotTwo when it does not have
// two nodal domains.
MorseReport morse_count_check(const Eigen::VectorXd& u, const SymmetricMesh& m, const std::string& involution);

// Stereographic projection of unit-normalized rows from the pole; PoleOnSurface when an image point
// lies within 1e-9 of the pole.
Eigen::MatrixXd stereographic(const Eigen::MatrixXd& points, const Eigen::Vector4d& pole);
// Point of S^3 among coordinate and diagonal candidates farthest from the normalized image.
Eigen::Vector4d farthest_pole(const Eigen::MatrixXd& points);
// OBJ with mapped positions when a map is given (padded to three coordinates; four-dimensional
// maps go through stereographic projection). IOError when the file cannot be written.
void export_obj(const std::string& path, const SymmetricMesh& m, const Eigen::MatrixXd* map = nullptr,
                const std::optional<Eigen::Vector4d>& pole = std::nullopt);

struct StructureReport {
  int dimension = 0;
  int even = 0;
  int odd = 0;
  bool parity_bounds = false;  // (<= 3, <= 1) closed, (<= 2, <= 1) bounded
  double conformality = 0.0;
  double norm_deviation = 0.0;
  AreaBound area;
  std::vector<int> nodal_counts;
  std::optional<SheetReport> sheets;
  std::optional<MorseReport> morse;
  std::vector<std::string> notes;
  nlohmann::json to_json() const;
};
StructureReport structure_report(const SymmetricMesh& m, const Spectrum& sp, const std::string& involution = "",
                                 int genus = -1);

}  // namespace eigenmax
