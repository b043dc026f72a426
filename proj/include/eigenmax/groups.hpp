#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <string>
#include <vector>

namespace eigenmax {

enum class GroupKind { Trivial, OneStar, DihedralStar, Platonic };

// A finite reflection group in Coxeter presentation. Generators are indexed 1..rank().
struct ReflectionGroup {
  GroupKind kind = GroupKind::Trivial;
  std::vector<int> params;  // {} | {} | {k} | {k12, k13, k23}

  int rank() const;
  // Relation order m(i,j) for 1-based generator indices; m(i,i) = 1.
  int m(int i, int j) const;
  std::string name() const;  // "1", "1*", "*kk", "*k12k13k23"
  bool operator==(const ReflectionGroup& o) const { return kind == o.kind && params == o.params; }
  bool operator<(const ReflectionGroup& o) const {
    return kind != o.kind ? kind < o.kind : params < o.params;
  }
};

ReflectionGroup make_group(GroupKind kind, std::vector<int> params = {});
ReflectionGroup trivial_group();
ReflectionGroup one_star();
ReflectionGroup dihedral_star(int k);
ReflectionGroup platonic(int k12, int k13, int k23);

int group_order(const ReflectionGroup& G);
int subgroup_order(const ReflectionGroup& G, int i, int j);

struct GroupElement {
  std::vector<int> word;  // shortlex-minimal word in 1-based generator indices
  int parity = 1;
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();
};

// Elements in breadth-first shortlex order; the identity comes first.
std::vector<GroupElement> enumerate_elements(const ReflectionGroup& G);

struct OrthogonalAction {
  int dimension = 3;
  std::vector<Eigen::MatrixXd> generator_matrices;
  std::vector<Eigen::VectorXd> fixed_plane_normals;
};

OrthogonalAction standard_action(const ReflectionGroup& G, int dimension = 3);

// Unit normals n_i (3D) of the canonical mirrors; the chamber is {p : n_i . p >= 0}.
std::vector<Eigen::Vector3d> mirror_normals(const ReflectionGroup& G);
Eigen::Matrix3d reflection_matrix(const Eigen::Vector3d& n);

// Distinct images of p under G (tolerance 1e-10).
std::vector<Eigen::Vector3d> orbit(const ReflectionGroup& G, const Eigen::Vector3d& p);

nlohmann::json to_json(const ReflectionGroup& G);
ReflectionGroup group_from_json(const nlohmann::json& j);

}  // namespace eigenmax
