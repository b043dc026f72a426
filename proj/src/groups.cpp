#include "eigenmax/groups.hpp"

#include <cmath>
#include <deque>
#include <numbers>

#include "eigenmax/error.hpp"

namespace eigenmax {

namespace {

bool platonic_allowed(int a, int b, int c) {
  if (a == 2 && b == 3 && (c == 3 || c == 4 || c == 5)) return true;
  return a == 2 && b == 2 && c >= 2;
}

bool same_matrix(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  return (a - b).cwiseAbs().maxCoeff() < 1e-10;
}

}  // namespace

int ReflectionGroup::rank() const {
  switch (kind) {
    case GroupKind::Trivial: return 0;
    case GroupKind::OneStar: return 1;
    case GroupKind::DihedralStar: return 2;
    case GroupKind::Platonic: return 3;
  }
  return 0;
}

int ReflectionGroup::m(int i, int j) const {
  if (i < 1 || j < 1 || i > rank() || j > rank()) throw Error(ErrorCode::BadIndex, "generator index out of range");
  if (i == j) return 1;
  if (kind == GroupKind::DihedralStar) return params[0];
  if (i > j) std::swap(i, j);
  if (i == 1 && j == 2) return params[0];
  if (i == 1 && j == 3) return params[1];
  return params[2];
}

std::string ReflectionGroup::name() const {
  switch (kind) {
    case GroupKind::Trivial: return "1";
    case GroupKind::OneStar: return "1*";
    case GroupKind::DihedralStar: return "*" + std::to_string(params[0]) + std::to_string(params[0]);
    case GroupKind::Platonic:
      return "*" + std::to_string(params[0]) + std::to_string(params[1]) + std::to_string(params[2]);
  }
  return "?";
}

ReflectionGroup make_group(GroupKind kind, std::vector<int> params) {
  ReflectionGroup G;
  G.kind = kind;
  switch (kind) {
    case GroupKind::Trivial:
    case GroupKind::OneStar:
      if (!params.empty()) throw Error(ErrorCode::InvalidType, "group takes no parameters");
      break;
    case GroupKind::DihedralStar:
      if (params.size() != 1) throw Error(ErrorCode::InvalidK, "*kk needs one parameter");
      if (params[0] < 2) throw Error(ErrorCode::InvalidK, "k must be >= 2");
      break;
    case GroupKind::Platonic:
      if (params.size() != 3 || !platonic_allowed(params[0], params[1], params[2]))
        throw Error(ErrorCode::InvalidTriple, "triple not in the allowed set");
      break;
  }
  G.params = std::move(params);
  return G;
}

ReflectionGroup trivial_group() { return make_group(GroupKind::Trivial); }
ReflectionGroup one_star() { return make_group(GroupKind::OneStar); }
ReflectionGroup dihedral_star(int k) { return make_group(GroupKind::DihedralStar, {k}); }
ReflectionGroup platonic(int a, int b, int c) { return make_group(GroupKind::Platonic, {a, b, c}); }

int group_order(const ReflectionGroup& G) {
  switch (G.kind) {
    case GroupKind::Trivial: return 1;
    case GroupKind::OneStar: return 2;
    case GroupKind::DihedralStar: return 2 * G.params[0];
    case GroupKind::Platonic: {
      // 4 / (1/a + 1/b + 1/c - 1) computed in integers
      const int a = G.params[0], b = G.params[1], c = G.params[2];
      return 4 * a * b * c / (b * c + a * c + a * b - a * b * c);
    }
  }
  return 1;
}

int subgroup_order(const ReflectionGroup& G, int i, int j) {
  if (i == j) throw Error(ErrorCode::BadIndex, "indices must differ");
  return 2 * G.m(i, j);
}

Eigen::Matrix3d reflection_matrix(const Eigen::Vector3d& n) {
  return Eigen::Matrix3d::Identity() - 2.0 * n * n.transpose();
}

std::vector<Eigen::Vector3d> mirror_normals(const ReflectionGroup& G) {
  using std::numbers::pi;
  std::vector<Eigen::Vector3d> ns;
  switch (G.kind) {
    case GroupKind::Trivial: break;
    case GroupKind::OneStar: ns.emplace_back(1, 0, 0); break;
    case GroupKind::DihedralStar: {
      const double a = pi / G.params[0];
      ns.emplace_back(1, 0, 0);
      ns.emplace_back(-std::cos(a), std::sin(a), 0);
      break;
    }
    case GroupKind::Platonic: {
      Eigen::Matrix3d gram;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gram(i, j) = -std::cos(pi / G.m(i + 1, j + 1));
      Eigen::LLT<Eigen::Matrix3d> llt(gram);
      Eigen::Matrix3d L = llt.matrixL();
      for (int i = 0; i < 3; ++i) ns.push_back(L.row(i).transpose().normalized());
      break;
    }
  }
  return ns;
}

std::vector<GroupElement> enumerate_elements(const ReflectionGroup& G) {
  const auto ns = mirror_normals(G);
  std::vector<Eigen::Matrix3d> gens;
  for (const auto& n : ns) gens.push_back(reflection_matrix(n));

  std::vector<GroupElement> out;
  out.push_back(GroupElement{});
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t g = 0; g < gens.size(); ++g) {
      Eigen::Matrix3d next = out[cur].matrix * gens[g];
      bool seen = false;
      for (const auto& e : out)
        if (same_matrix(e.matrix, next)) {
          seen = true;
          break;
        }
      if (seen) continue;
      GroupElement e;
      e.word = out[cur].word;
      e.word.push_back(static_cast<int>(g) + 1);
      e.parity = -out[cur].parity;
      e.matrix = next;
      out.push_back(std::move(e));
      queue.push_back(out.size() - 1);
    }
  }
  return out;
}

OrthogonalAction standard_action(const ReflectionGroup& G, int dimension) {
  if (dimension != 2 && dimension != 3) throw Error(ErrorCode::DimensionMismatch, "dimension must be 2 or 3");
  if (dimension == 2 && G.kind == GroupKind::Platonic)
    throw Error(ErrorCode::DimensionMismatch, "Platonic groups act in dimension 3");
  OrthogonalAction act;
  act.dimension = dimension;
  for (const auto& n3 : mirror_normals(G)) {
    Eigen::VectorXd n = n3.head(dimension);
    act.fixed_plane_normals.push_back(n);
    act.generator_matrices.push_back(Eigen::MatrixXd::Identity(dimension, dimension) - 2.0 * n * n.transpose());
  }
  return act;
}

std::vector<Eigen::Vector3d> orbit(const ReflectionGroup& G, const Eigen::Vector3d& p) {
  std::vector<Eigen::Vector3d> pts;
  for (const auto& e : enumerate_elements(G)) {
    Eigen::Vector3d q = e.matrix * p;
    bool seen = false;
    for (const auto& r : pts)
      if ((r - q).cwiseAbs().maxCoeff() < 1e-10) {
        seen = true;
        break;
      }
    if (!seen) pts.push_back(q);
  }
  return pts;
}

nlohmann::json to_json(const ReflectionGroup& G) {
  static const char* names[] = {"Trivial", "OneStar", "DihedralStar", "Platonic"};
  return {{"kind", names[static_cast<int>(G.kind)]}, {"params", G.params}};
}

ReflectionGroup group_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  std::vector<int> params;
  if (j.contains("params")) params = j.at("params").get<std::vector<int>>();
  if (kind == "Trivial" || kind == "1") return make_group(GroupKind::Trivial, params);
  if (kind == "OneStar" || kind == "1*") return make_group(GroupKind::OneStar, params);
  if (kind == "DihedralStar" || kind == "*kk") return make_group(GroupKind::DihedralStar, params);
  if (kind == "Platonic") return make_group(GroupKind::Platonic, params);
  throw Error(ErrorCode::ParseError, "unknown group kind '" + kind + "'");
}

}  // namespace eigenmax
