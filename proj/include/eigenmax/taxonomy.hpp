#pragma once

#include <array>
#include <map>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "eigenmax/groups.hpp"

namespace eigenmax {

struct Species {
  int genus = 0;
  int k = 0;               // boundary components
  bool orientable = true;  // epsilon = +
  int F = 0;
  int Cm = 0, Cp = 0;  // twisted / untwisted ovals
  int Tm = 0, Tp = 0;  // twisted / untwisted chains
  int W = 0;           // fixed-point arcs
  int C() const { return Cm + Cp; }
  int T() const { return Tm + Tp; }
};

// Bit i-1 set when classification clause i fails (clauses 1..4).
unsigned species_violations(const Species& s);

struct SpeciesReport {
  bool valid = false;
  std::vector<std::string> violations;  // "clause-i", "clause-ii", ...
};
SpeciesReport validate_species(const Species& s);
int euler_char(const Species& s);
// Euler characteristic from genus and orientability: 2-2g-k or 2-g-k.
int topological_euler_char(const Species& s);

// Pair index: (1,2) -> 0, (1,3) -> 1, (2,3) -> 2.
int pair_index(int i, int j);

struct TypeB {
  int f = 0;
  std::array<int, 3> e{0, 0, 0};
  std::array<int, 3> v{0, 0, 0};

  int& ei(int i) { return e[i - 1]; }
  int ei(int i) const { return e[i - 1]; }
  int& vij(int i, int j) { return v[pair_index(i, j)]; }
  int vij(int i, int j) const { return v[pair_index(i, j)]; }
  bool nonnegative() const;
  bool operator==(const TypeB& o) const { return f == o.f && e == o.e && v == o.v; }
  std::string str() const;  // "2+3r1+r1r2"
};

// Throws InvalidType if b mentions generators missing from G or has negative entries.
void check_type(const ReflectionGroup& G, const TypeB& b);
// |G| (f + sum e_i / 2 + sum v_ij / (2 k_ij)) - 1; NonIntegerGenus unless a nonnegative integer.
int genus_of_type(const ReflectionGroup& G, const TypeB& b);

enum class Family { ClosedM, ClosedMa, BoundedNtau, BoundedNrho1 };

struct SurfaceDescriptor {
  Family family = Family::ClosedM;
  ReflectionGroup group;
  TypeB b;
  int a = 0;  // ClosedMa only

  static SurfaceDescriptor closed(const ReflectionGroup& G, const TypeB& b);
  static SurfaceDescriptor closed_a(int a);
  static SurfaceDescriptor bounded_tau(const ReflectionGroup& G, const TypeB& b);
  static SurfaceDescriptor bounded_rho1(const ReflectionGroup& G, const TypeB& b);

  bool closed_family() const { return family == Family::ClosedM || family == Family::ClosedMa; }
  // Group and type of the underlying closed double.
  ReflectionGroup effective_group() const;
  TypeB effective_type() const;
  int genus() const;
  int boundary_count() const;
  std::string key() const;  // normal form used for memoization and display
  bool operator==(const SurfaceDescriptor& o) const { return key() == o.key(); }
};

bool rho1_splits(const ReflectionGroup& G);

struct CollapsedClass {
  std::string description;
  bool in_p_iota = false;  // meaningful for bounded descriptors only
};

struct DegenerationEdge {
  SurfaceDescriptor parent;
  SurfaceDescriptor child;
  std::string v;  // "1-r1", "r1-r1r2", "r1r2" or a proof-case tag
  std::string case_tag;
  std::vector<CollapsedClass> partition;
  bool outside_elementary_list = false;
};

std::vector<DegenerationEdge> elementary_degenerations(const SurfaceDescriptor& parent);
// Single-orbit curve collapses enumerated from the proof cases (2a, 2b, 3b, 3c).
std::vector<DegenerationEdge> all_case_degenerations(const SurfaceDescriptor& parent);

enum class DegenerationMode { Elementary, AllCases };

struct DegenerationDag {
  std::vector<SurfaceDescriptor> nodes;  // nodes[0] is the root
  std::vector<DegenerationEdge> edges;
  std::vector<std::pair<int, int>> edge_nodes;
  int complexity = 0;  // longest chain length from the root
  std::string to_dot() const;
  nlohmann::json to_json() const;
};

DegenerationDag degeneration_dag(const SurfaceDescriptor& root, int depth,
                                 DegenerationMode mode = DegenerationMode::Elementary);

struct MarkedClosed {
  SurfaceDescriptor surface;
  std::string reflection;  // "tau" or "rho1"
};

MarkedClosed double_surface(const SurfaceDescriptor& bounded);
SurfaceDescriptor halve(const MarkedClosed& closed);

struct BoundaryTopology {
  int genus = 0;
  int boundary_components = 0;
};
BoundaryTopology boundary_topology(const SurfaceDescriptor& bounded);

// Species of the closed surface with respect to tau (orientable, all ovals untwisted).
Species species_of(const SurfaceDescriptor& closed);

nlohmann::json to_json(const TypeB& b);
TypeB type_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SurfaceDescriptor& d);
SurfaceDescriptor descriptor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Species& s);
Species species_from_json(const nlohmann::json& j);

}  // namespace eigenmax
