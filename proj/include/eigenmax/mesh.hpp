#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <json.hpp>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "eigenmax/groups.hpp"
#include "eigenmax/taxonomy.hpp"

namespace eigenmax {

struct PanelLabel {
  enum Kind { Outer, Mirror, MirrorTau, Free };
  Kind kind = Outer;
  int index = 0;  // generator index for Mirror

  std::string str() const;  // "outer", "mirror:1", "mirror:tau", "free"
  static PanelLabel parse(const std::string& s);
  bool operator==(const PanelLabel& o) const { return kind == o.kind && (kind != Mirror || index == o.index); }
  bool operator<(const PanelLabel& o) const { return kind != o.kind ? kind < o.kind : index < o.index; }
};

struct BoundaryEdge {
  int a = 0, b = 0;  // oriented as in its triangle
  PanelLabel label;
};

// Finite group acting by vertex permutations; element 0 is the identity.
struct GroupAction {
  std::vector<std::string> generator_names;
  std::vector<int> generator_element;  // element index of each generator
  std::vector<std::string> element_names;
  std::vector<std::vector<int>> perms;
  std::vector<int> parity;

  int size() const { return static_cast<int>(perms.size()); }
  // Element index by generator name or element word; -1 if absent.
  int find(const std::string& name) const;
  static GroupAction trivial(int n);
  // Closure of the generator permutations; parities are products of generator parities.
  static GroupAction generate(int n, const std::vector<std::string>& names, const std::vector<std::vector<int>>& gens,
                              const std::vector<int>& gen_parity);
};

struct SymmetricMesh {
  std::vector<Eigen::Vector3d> positions;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;     // unique, a < b
  std::vector<double> edge_length;           // reference metric
  std::vector<std::array<int, 3>> tri_edges;  // edge opposite local vertex k
  std::vector<BoundaryEdge> boundary;
  std::vector<double> density;
  GroupAction action;
  std::vector<int> triangle_chamber;  // copy index per triangle when assembled from a chamber
  nlohmann::json descriptor;          // provenance of the construction (group, type, builtin name)

  int num_vertices() const { return static_cast<int>(positions.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int edge_index(int a, int b) const;
  std::array<double, 3> triangle_lengths(int t) const;  // opposite local vertex k
  double triangle_area(int t) const;                      // reference area

  std::unordered_map<long long, int> edge_lookup;
};

// Build edges, lengths and boundary list. Lengths already stored for an edge are kept,
// new edges get chord lengths. Existing boundary labels are kept, new boundary edges are Outer.
void finalize_mesh(SymmetricMesh& m);
void set_edge_lengths_from_positions(SymmetricMesh& m);
void relabel_boundary(SymmetricMesh& m, const std::function<PanelLabel(int, int)>& label_of);

double area(const SymmetricMesh& m);
double boundary_length(const SymmetricMesh& m);
double boundary_length(const SymmetricMesh& m, const std::vector<PanelLabel>& labels);
SymmetricMesh set_density(const SymmetricMesh& m, const std::vector<double>& rho);
bool density_invariant(const SymmetricMesh& m, const std::vector<double>& rho, double rel_tol = 1e-12);

int euler_characteristic(const SymmetricMesh& m);
int boundary_loop_count(const SymmetricMesh& m);
// Boundary loops as ordered vertex cycles following the boundary orientation.
std::vector<std::vector<int>> boundary_loops(const SymmetricMesh& m);
int closed_genus(const SymmetricMesh& m);  // orientable genus from chi and boundary loops
bool is_manifold(const SymmetricMesh& m);
bool is_consistently_oriented(const SymmetricMesh& m);

struct MeshCheck {
  bool ok = true;
  std::vector<std::string> problems;
};
// Manifoldness, orientation, action validity (triangles and lengths), density positivity and invariance.
MeshCheck validate_mesh(const SymmetricMesh& m);
double min_angle_degrees(const SymmetricMesh& m);

// --- reference geometries -------------------------------------------------
SymmetricMesh round_sphere(int level);
SymmetricMesh flat_square_torus(int level);
SymmetricMesh flat_torus(double aspect, int level);  // [0,1] x [0,aspect]
SymmetricMesh unit_disk(int level);
SymmetricMesh unit_disk_rings(int rings);
SymmetricMesh flat_cylinder(double L, int level);
SymmetricMesh flat_cylinder_m(double L, int m);     // m vertices around
SymmetricMesh conformal_annulus(double T, int level);  // S^1 x [-T, T]
SymmetricMesh conformal_annulus_m(double T, int m);

// "sphere:3", "torus:2", "torus:aspect=1.2:2", "disk:3", "cylinder:L=1:3", "annulus:T=1.2:3"
SymmetricMesh builtin(const std::string& spec);

// --- chambers and assembly ------------------------------------------------
enum FixedBits : unsigned { FixRho1 = 1u, FixRho2 = 2u, FixRho3 = 4u, FixTau = 8u };

struct ChamberMesh {
  SymmetricMesh mesh;                  // trivial action
  std::vector<unsigned> fixed_mask;    // per vertex: generators whose mirror contains it
  ReflectionGroup group;
  TypeB type;
  double hole_radius = 0.0;
};

ChamberMesh chamber_mesh(const ReflectionGroup& G, const TypeB& b, double h);
ChamberMesh chamber_mesh_ma(int a, double h);

struct AssemblySpec {
  std::vector<int> mirrors;  // generator indices glued across their panels
  bool tau = true;
};
AssemblySpec full_assembly(const ReflectionGroup& G);

SymmetricMesh reflect_assemble(const ChamberMesh& chamber, const AssemblySpec& spec);

// Mesh for a descriptor with roughly `target_vertices` vertices.
SymmetricMesh descriptor_mesh(const SurfaceDescriptor& d, int target_vertices);

// --- cylinder gluing --------------------------------------------------------
struct GluedMetricSpec {
  double eps = 0.05;
  double L = 10.0;
  std::vector<std::pair<int, int>> pairs;  // (vertex on parent, vertex on attached)
};

struct GluedMesh {
  SymmetricMesh mesh;
  std::vector<double> cylinder_radius;  // effective radius per pair (loop perimeter / 2 pi)
  double excised_area = 0.0;  // reference areas
  double cylinder_area = 0.0;
};

// attached == nullptr glues the parent to itself.
GluedMesh glue_cylinder(const SymmetricMesh& parent, const SymmetricMesh* attached, const GluedMetricSpec& spec);

// --- io ---------------------------------------------------------------------
nlohmann::json mesh_to_json(const SymmetricMesh& m);
SymmetricMesh mesh_from_json(const nlohmann::json& j);
void write_obj(const std::string& path, const SymmetricMesh& m, const std::vector<Eigen::Vector3d>* positions = nullptr);

}  // namespace eigenmax
