#include "eigenmax/eigenmap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eigenmax/conformal.hpp"
#include "eigenmax/error.hpp"

namespace eigenmax {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

VectorXd quadrature(const SymmetricMesh& m, ProblemKind kind) {
  return kind == ProblemKind::Laplace ? mass_diagonal(m)
                                      : boundary_mass_diagonal(m, {PanelLabel{PanelLabel::Outer, 0}});
}

// Planar frame of a reference triangle: columns are the edges from local vertex 0.
Eigen::Matrix2d triangle_frame(const SymmetricMesh& m, int t) {
  const auto l = m.triangle_lengths(t);
  const double x = (l[2] * l[2] + l[1] * l[1] - l[0] * l[0]) / (2 * l[2]);
  const double y = std::sqrt(std::max(l[1] * l[1] - x * x, 0.0));
  Eigen::Matrix2d E;
  E << l[2], x, 0, y;
  return E;
}

// Pullback metric of the piecewise-linear map on triangle t in the frame above.
Eigen::Matrix2d pullback(const MatrixXd& phi, const SymmetricMesh& m, int t) {
  const auto& tri = m.triangles[t];
  MatrixXd D(phi.cols(), 2);
  D.col(0) = (phi.row(tri[1]) - phi.row(tri[0])).transpose();
  D.col(1) = (phi.row(tri[2]) - phi.row(tri[0])).transpose();
  const MatrixXd J = D * triangle_frame(m, t).inverse();
  return J.transpose() * J;
}

double triangle_density(const SymmetricMesh& m, int t) {
  const auto& tri = m.triangles[t];
  return (m.density[tri[0]] + m.density[tri[1]] + m.density[tri[2]]) / 3.0;
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

int involution_index(const SymmetricMesh& m, const std::string& name) {
  const int g = m.action.find(name);
  if (g < 0) throw Error(ErrorCode::NotInvolution, "'" + name + "' is not an element of the action");
  const auto& p = m.action.perms[g];
  for (int v = 0; v < m.num_vertices(); ++v)
    if (p[p[v]] != v) throw Error(ErrorCode::NotInvolution, "'" + name + "' does not square to the identity");
  return g;
}

std::vector<char> boundary_flags(const SymmetricMesh& m) {
  std::vector<char> b(m.num_vertices(), 0);
  for (const auto& e : m.boundary) b[e.a] = b[e.b] = 1;
  return b;
}

struct FixedComponents {
  std::vector<std::vector<int>> ovals;  // ordered cycles
  std::vector<std::vector<int>> arcs;
  std::vector<int> points;
  std::vector<std::array<int, 2>> edges;
};

FixedComponents fixed_components(const SymmetricMesh& m, const std::vector<int>& fixed) {
  FixedComponents out;
  std::vector<char> is_fixed(m.num_vertices(), 0);
  for (int v : fixed) is_fixed[v] = 1;
  std::vector<std::vector<int>> adj(m.num_vertices());
  for (const auto& e : m.edges)
    if (is_fixed[e[0]] && is_fixed[e[1]]) {
      adj[e[0]].push_back(e[1]);
      adj[e[1]].push_back(e[0]);
      out.edges.push_back(e);
    }
  const auto bnd = boundary_flags(m);
  std::vector<char> seen(m.num_vertices(), 0);
  for (int s : fixed) {
    if (seen[s]) continue;
    std::vector<int> comp{s};
    seen[s] = 1;
    for (size_t i = 0; i < comp.size(); ++i)
      for (int w : adj[comp[i]])
        if (!seen[w]) seen[w] = 1, comp.push_back(w);
    const bool touches = std::any_of(comp.begin(), comp.end(), [&](int v) { return bnd[v]; });
    const bool cycle = comp.size() >= 3 && std::all_of(comp.begin(), comp.end(), [&](int v) { return adj[v].size() == 2; });
    if (comp.size() == 1 && adj[s].empty()) {
      out.points.push_back(s);
    } else if (cycle && !touches) {
      std::vector<int> order{s};
      int prev = -1, cur = s;
      while (true) {
        const int nxt = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
        if (nxt == s) break;
        order.push_back(nxt);
        prev = cur;
        cur = nxt;
      }
      out.ovals.push_back(order);
    } else {
      out.arcs.push_back(comp);
    }
  }
  return out;
}

double segment_point_distance(const VectorXd& a, const VectorXd& b, const VectorXd& p) {
  const VectorXd ab = b - a;
  const double L = ab.squaredNorm();
  const double t = L > 0 ? std::clamp((p - a).dot(ab) / L, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

double cross2(const Vector2d& a, const Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_cross(const VectorXd& a, const VectorXd& b, const VectorXd& c, const VectorXd& d, bool sphere) {
  if (sphere) {
    const Vector3d A = a, B = b, C = c, D = d;
    const Vector3d n1 = A.cross(B), n2 = C.cross(D);
    const double s1 = n1.dot(C), s2 = n1.dot(D), s3 = n2.dot(A), s4 = n2.dot(B);
    if (!(s1 * s2 < 0 && s3 * s4 < 0)) return false;
    return (A + B).dot(C + D) > 0;
  }
  const Vector2d A = a, B = b, C = c, D = d;
  const double s1 = cross2(B - A, C - A), s2 = cross2(B - A, D - A);
  const double s3 = cross2(D - C, A - C), s4 = cross2(D - C, B - C);
  return s1 * s2 < 0 && s3 * s4 < 0;
}

// When the boundary-norm condition leaves the diagonal Steklov weights undetermined, pick the
// admissible weights whose map is closest to conformal.
void refine_steklov_weights(const SymmetricMesh& m, const std::vector<VectorXd>& f, const VectorXd& q,
                            std::vector<double>& w) {
  const int k = static_cast<int>(f.size());
  std::vector<int> bnd;
  for (int v = 0; v < q.size(); ++v)
    if (q[v] > 0) bnd.push_back(v);
  MatrixXd A(bnd.size(), k + 1);
  for (size_t r = 0; r < bnd.size(); ++r) {
    for (int j = 0; j < k; ++j) A(r, j) = std::sqrt(q[bnd[r]]) * f[j][bnd[r]] * f[j][bnd[r]];
    A(r, k) = -std::sqrt(q[bnd[r]]);
  }
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullV);
  const VectorXd sv = svd.singularValues();
  int nullity = 0;
  for (int i = 0; i < k + 1; ++i)
    if (i >= sv.size() || sv[i] < 1e-8 * sv[0]) ++nullity;
  if (nullity < 2) return;
  const MatrixXd N = svd.matrixV().rightCols(nullity);
  MatrixXd C = MatrixXd::Zero(2 * m.num_triangles(), k + 1);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double s = std::sqrt(m.triangle_area(t));
    for (int j = 0; j < k; ++j) {
      const Eigen::Matrix2d P = pullback(f[j], m, t);
      C(2 * t, j) = s * (P(0, 0) - P(1, 1));
      C(2 * t + 1, j) = s * 2 * P(0, 1);
    }
  }
  VectorXd sum = VectorXd::Ones(k + 1);
  sum[k] = 0;
  // Minimize |C N z|^2 subject to sum . N z = k.
  const MatrixXd CN = C * N;
  const VectorXd a = N.transpose() * sum;
  MatrixXd KKT = MatrixXd::Zero(nullity + 1, nullity + 1);
  KKT.topLeftCorner(nullity, nullity) = CN.transpose() * CN;
  KKT.block(0, nullity, nullity, 1) = a;
  KKT.block(nullity, 0, 1, nullity) = a.transpose();
  VectorXd rhs = VectorXd::Zero(nullity + 1);
  rhs[nullity] = k;
  const VectorXd x = N * KKT.completeOrthogonalDecomposition().solve(rhs).head(nullity);
  if (x.head(k).minCoeff() < 0) return;
  for (int j = 0; j < k; ++j) w[j] = x[j];
}

}  // namespace

int Eigenmap::even() const { return static_cast<int>(std::count(parity.begin(), parity.end(), 1)); }
int Eigenmap::odd() const { return static_cast<int>(std::count(parity.begin(), parity.end(), -1)); }

Eigenmap first_eigenmap(const SymmetricMesh& m, const Spectrum& sp, const std::string& involution) {
  const auto idx = sp.first_cluster();
  if (idx.empty()) throw Error(ErrorCode::EmptyCluster, "spectrum has no resolved first cluster");
  const int k = static_cast<int>(idx.size());
  MatrixXd U(sp.eigenvectors.rows(), k);
  for (int i = 0; i < k; ++i) U.col(i) = sp.eigenvectors.col(idx[i]);
  const auto qr = U.colPivHouseholderQr();

  Eigenmap out;
  out.kind = sp.kind;
  out.involution = involution;
  const ClusterFlattening fc = flatten_cluster(m, sp.kind, U);
  const MatrixXd E = qr.solve(fc.basis);
  MatrixXd W = E * fc.weights.asDiagonal() * E.transpose();

  std::vector<std::pair<MatrixXd, int>> blocks;
  if (involution.empty()) {
    blocks.emplace_back(MatrixXd::Identity(k, k), 0);
  } else {
    const int g = involution_index(m, involution);
    MatrixXd Ut(U.rows(), k);
    for (int v = 0; v < U.rows(); ++v) Ut.row(v) = U.row(m.action.perms[g][v]);
    MatrixXd T = qr.solve(Ut);
    T = 0.5 * (T + T.transpose());
    W = 0.5 * (W + T * W * T);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(T);
    std::vector<int> even, odd;
    for (int i = 0; i < k; ++i) (es.eigenvalues()[i] > 0 ? even : odd).push_back(i);
    for (const auto& [cols, sign] : {std::pair{even, 1}, std::pair{odd, -1}}) {
      if (cols.empty()) continue;
      MatrixXd B(k, static_cast<int>(cols.size()));
      for (size_t i = 0; i < cols.size(); ++i) B.col(static_cast<int>(i)) = es.eigenvectors().col(cols[i]);
      blocks.emplace_back(B, sign);
    }
  }
  out.gram = W;

  const SpMat K = assemble_stiffness(m);
  const VectorXd q = quadrature(m, sp.kind);
  std::vector<VectorXd> cols;
  std::vector<double> weights;
  for (const auto& [B, sign] : blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(B.transpose() * W * B);
    std::vector<std::pair<double, int>> order;
    std::vector<VectorXd> f;
    for (int j = 0; j < B.cols(); ++j) {
      f.push_back(U * (B * es.eigenvectors().col(j)));
      const VectorXd& fj = f.back();
      order.emplace_back(fj.dot(K * fj) / fj.dot(q.asDiagonal() * fj), j);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [lam, j] : order) {
      cols.push_back(f[j]);
      weights.push_back(std::max(es.eigenvalues()[j], 0.0));
      out.eigenvalues.push_back(lam);
      out.parity.push_back(sign);
    }
  }
  if (sp.kind == ProblemKind::Steklov) refine_steklov_weights(m, cols, q, weights);
  out.basis.resize(U.rows(), k);
  out.weights.resize(k);
  for (int j = 0; j < k; ++j) {
    out.basis.col(j) = cols[j];
    out.weights[j] = weights[j];
  }
  MatrixXd phi = out.basis * out.weights.cwiseSqrt().asDiagonal();
  const double mean = q.dot(phi.rowwise().squaredNorm()) / q.sum();
  out.scale = 1.0 / std::sqrt(mean);
  out.components = out.scale * phi;
  out.norm = out.components.rowwise().norm();
  return out;
}

double norm_deviation(const Eigenmap& map, const SymmetricMesh& m) {
  const VectorXd q = quadrature(m, map.kind);
  double d = 0;
  for (int v = 0; v < map.norm.size(); ++v)
    if (q[v] > 0) d = std::max(d, std::abs(map.norm[v] - 1.0));
  return d;
}

double conformality_residual(const MatrixXd& phi, const SymmetricMesh& m, bool pointwise) {
  if (phi.cols() < 2) throw Error(ErrorCode::DimensionMismatch, "conformality needs at least two components");
  if (pointwise) {
    double dev = 0, den = 0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      const Eigen::Matrix2d G = pullback(phi, m, t);
      const double A = m.triangle_area(t), h = 0.5 * G.trace();
      dev += A * (G - h * Eigen::Matrix2d::Identity()).squaredNorm();
      den += 2 * A * h * h;
    }
    return den > 0 ? std::sqrt(dev / den) : 0.0;
  }
  std::vector<Eigen::Matrix2d> G(m.num_triangles());
  double num = 0, den = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    G[t] = pullback(phi, m, t);
    const double A = m.triangle_area(t), r = triangle_density(m, t);
    num += A * r * G[t].trace();
    den += 2 * A * r * r;
  }
  const double alpha = num / den;
  double dev = 0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double A = m.triangle_area(t), r = triangle_density(m, t);
    dev += A * (G[t] - alpha * r * Eigen::Matrix2d::Identity()).squaredNorm();
  }
  return std::sqrt(dev / (alpha * alpha * den));
}

double mapped_area(const MatrixXd& phi, const SymmetricMesh& m) {
  const SpMat K = assemble_stiffness(m);
  double a = 0;
  for (int c = 0; c < phi.cols(); ++c) a += 0.5 * phi.col(c).dot(K * phi.col(c));
  return a;
}

nlohmann::json AreaBound::to_json() const {
  nlohmann::json j{{"area", area}, {"bound", bound}, {"strict", strict}};
  if (lawson_reference) j["lawson_reference"] = *lawson_reference;
  return j;
}

AreaBound area_bound_check(const MatrixXd& phi, const SymmetricMesh& m, bool closed, int genus) {
  AreaBound b;
  b.area = mapped_area(phi, m);
  b.bound = closed ? 8 * kPi : 2 * kPi;
  b.strict = b.area < b.bound;
  if (closed && genus >= 1) b.lawson_reference = 8 * kPi * (1 - std::log(2.0) / (2.0 * genus));
  return b;
}

int nodal_domain_count(const VectorXd& u, const SymmetricMesh& m) {
  const double tol = 1e-10 * u.cwiseAbs().maxCoeff();
  auto sign = [&](int v) { return u[v] > tol ? 1 : (u[v] < -tol ? -1 : 0); };
  UnionFind uf(m.num_vertices());
  for (const auto& e : m.edges)
    if (sign(e[0]) != 0 && sign(e[0]) == sign(e[1])) uf.unite(e[0], e[1]);
  int count = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (sign(v) != 0 && uf.find(v) == v) ++count;
  return count;
}

std::vector<int> fixed_vertices(const SymmetricMesh& m, const std::string& involution) {
  const int g = involution_index(m, involution);
  std::vector<int> out;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.action.perms[g][v] == v) out.push_back(v);
  return out;
}

bool odd_nodal_on_fixed_set(const VectorXd& u, const SymmetricMesh& m, const std::string& involution) {
  const auto fixed = fixed_vertices(m, involution);
  std::vector<char> is_fixed(m.num_vertices(), 0);
  for (int v : fixed) is_fixed[v] = 1;
  const double tol = 1e-10 * u.cwiseAbs().maxCoeff();
  for (int v = 0; v < u.size(); ++v)
    if (std::abs(u[v]) <= tol && !is_fixed[v]) return false;
  for (const auto& e : m.edges)
    if ((u[e[0]] > tol && u[e[1]] < -tol) || (u[e[0]] < -tol && u[e[1]] > tol)) return false;
  return true;
}

nlohmann::json SheetReport::to_json() const {
  return {{"target", target},
          {"probes", probes},
          {"histogram", histogram},
          {"doubled_fraction", doubled_fraction},
          {"fixed_set_one_sheeted", fixed_set_one_sheeted},
          {"ovals_convex", ovals_convex},
          {"branch_triangles", branch_triangles},
          {"doubling", doubling}};
}

SheetReport doubling_projection_check(const Eigenmap& map, const SymmetricMesh& m, int probes) {
  if (map.involution.empty() || map.odd() != 1 || (map.even() != 2 && map.even() != 3))
    throw Error(ErrorCode::WrongParitySplit, "doubling needs two or three even components and one odd component");
  SheetReport rep;
  const bool sphere = map.even() == 3;
  rep.target = sphere ? "sphere" : "disk";
  const int dim = sphere ? 3 : 2;
  const int n = m.num_vertices();

  MatrixXd P(n, dim);
  for (int v = 0, c = 0; c < map.dim(); ++c)
    if (map.parity[c] == 1) P.col(v++) = map.components.col(c);
  if (sphere)
    for (int v = 0; v < n; ++v) P.row(v).normalize();

  // Branch triangles have nearly vanishing differential.
  std::vector<double> energy(m.num_triangles());
  double mean = 0;
  for (int t = 0; t < m.num_triangles(); ++t) mean += energy[t] = pullback(map.components, m, t).trace();
  mean /= std::max(1, m.num_triangles());
  std::vector<char> branch(m.num_triangles(), 0);
  for (int t = 0; t < m.num_triangles(); ++t)
    if (energy[t] < 1e-4 * mean) branch[t] = 1, ++rep.branch_triangles;

  auto orient = [&](int t) {
    const auto& tri = m.triangles[t];
    if (sphere) return Vector3d(P.row(tri[0])).dot(Vector3d(P.row(tri[1])).cross(Vector3d(P.row(tri[2]))));
    return cross2(Vector2d(P.row(tri[1]) - P.row(tri[0])), Vector2d(P.row(tri[2]) - P.row(tri[0])));
  };
  std::vector<double> sgn(m.num_triangles());
  for (int t = 0; t < m.num_triangles(); ++t) sgn[t] = orient(t);

  // Fold edges: boundary edges, fixed edges and edges whose triangles flip projected orientation.
  const auto fixed = fixed_vertices(m, map.involution);
  const FixedComponents fc = fixed_components(m, fixed);
  std::vector<std::vector<int>> edge_tris(m.edges.size());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) edge_tris[m.tri_edges[t][k]].push_back(t);
  std::vector<std::array<int, 2>> folds = fc.edges;
  for (size_t e = 0; e < m.edges.size(); ++e)
    if (edge_tris[e].size() == 1 || (edge_tris[e].size() == 2 && sgn[edge_tris[e][0]] * sgn[edge_tris[e][1]] < 0))
      folds.push_back(m.edges[e]);
  std::vector<double> lens;
  for (const auto& e : m.edges) lens.push_back((P.row(e[0]) - P.row(e[1])).norm());
  std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
  const double delta = 1.5 * lens[lens.size() / 2];

  auto inside = [&](int t, const VectorXd& y) {
    const auto& tri = m.triangles[t];
    if (sphere) {
      const Vector3d a = P.row(tri[0]), b = P.row(tri[1]), c = P.row(tri[2]), p = y;
      if ((a + b + c).dot(p) <= 0) return false;
      const double s1 = a.cross(b).dot(p), s2 = b.cross(c).dot(p), s3 = c.cross(a).dot(p);
      return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
    }
    const Vector2d a = P.row(tri[0]), b = P.row(tri[1]), c = P.row(tri[2]), p = y;
    const double s1 = cross2(b - a, p - a), s2 = cross2(c - b, p - b), s3 = cross2(a - c, p - c);
    return (s1 >= 0 && s2 >= 0 && s3 >= 0) || (s1 <= 0 && s2 <= 0 && s3 <= 0);
  };

  const double radius = sphere ? 1.0 : P.rowwise().norm().maxCoeff();
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  rep.histogram.assign(1, 0);
  int doubled = 0;
  for (int i = 0; i < probes; ++i) {
    VectorXd y(dim);
    if (sphere) {
      const double z = 1.0 - 2.0 * (i + 0.5) / probes, r = std::sqrt(1 - z * z);
      y << r * std::cos(golden * i), r * std::sin(golden * i), z;
    } else {
      const double r = radius * std::sqrt((i + 0.5) / probes);
      y << r * std::cos(golden * i), r * std::sin(golden * i);
    }
    bool near = false;
    for (const auto& e : folds)
      if (segment_point_distance(P.row(e[0]).transpose(), P.row(e[1]).transpose(), y) < delta) {
        near = true;
        break;
      }
    if (near) continue;
    int count = 0;
    for (int t = 0; t < m.num_triangles(); ++t)
      if (!branch[t] && inside(t, y)) ++count;
    if (count == 0) continue;
    if (count >= static_cast<int>(rep.histogram.size())) rep.histogram.resize(count + 1, 0);
    ++rep.histogram[count];
    ++rep.probes;
    if (count == 2) ++doubled;
  }
  rep.doubled_fraction = rep.probes ? static_cast<double>(doubled) / rep.probes : 0.0;

  // The fixed-set image is one-sheeted when its projected edges do not cross and its vertices stay apart.
  rep.fixed_set_one_sheeted = true;
  for (size_t i = 0; i < fixed.size() && rep.fixed_set_one_sheeted; ++i)
    for (size_t j = i + 1; j < fixed.size(); ++j)
      if ((P.row(fixed[i]) - P.row(fixed[j])).norm() < 1e-12) {
        rep.fixed_set_one_sheeted = false;
        break;
      }
  for (size_t i = 0; i < fc.edges.size() && rep.fixed_set_one_sheeted; ++i)
    for (size_t j = i + 1; j < fc.edges.size(); ++j) {
      const auto& a = fc.edges[i];
      const auto& b = fc.edges[j];
      if (a[0] == b[0] || a[0] == b[1] || a[1] == b[0] || a[1] == b[1]) continue;
      if (segments_cross(P.row(a[0]).transpose(), P.row(a[1]).transpose(), P.row(b[0]).transpose(),
                         P.row(b[1]).transpose(), sphere)) {
        rep.fixed_set_one_sheeted = false;
        break;
      }
    }

  // Oval images: consistent turning within 1e-2 radians.
  rep.ovals_convex = true;
  for (const auto& oval : fc.ovals) {
    const int L = static_cast<int>(oval.size());
    VectorXd c = VectorXd::Zero(dim);
    for (int v : oval) c += P.row(v).transpose();
    c /= L;
    std::vector<Vector2d> pts;
    Vector3d e1, e2;
    if (sphere) {
      const Vector3d nrm = Vector3d(c).normalized();
      e1 = nrm.unitOrthogonal();
      e2 = nrm.cross(e1);
    }
    for (int v : oval) {
      if (sphere) {
        const Vector3d p = P.row(v);
        pts.emplace_back(p.dot(e1), p.dot(e2));
      } else {
        pts.emplace_back(P(v, 0), P(v, 1));
      }
    }
    int pos = 0, neg = 0;
    for (int i = 0; i < L; ++i) {
      const Vector2d a = pts[(i + 1) % L] - pts[i], b = pts[(i + 2) % L] - pts[(i + 1) % L];
      const double ang = std::atan2(cross2(a, b), a.dot(b));
      if (ang > 1e-2) ++pos;
      if (ang < -1e-2) ++neg;
    }
    if (pos && neg) rep.ovals_convex = false;
  }
  rep.doubling = rep.probes > 0 && rep.doubled_fraction >= 0.98 && rep.fixed_set_one_sheeted;
  return rep;
}

bool is_critical_vertex(const VectorXd& u, const SymmetricMesh& m, int v) {
  // One-ring triangles as (next, after) neighbor pairs in orientation order.
  std::vector<std::array<int, 3>> ring;  // a, b, triangle
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (tri[k] == v) ring.push_back({tri[(k + 1) % 3], tri[(k + 2) % 3], t});
  }
  if (ring.empty()) return false;
  std::vector<std::array<int, 3>> ordered{ring[0]};
  while (ordered.size() < ring.size()) {
    const int b = ordered.back()[1];
    auto it = std::find_if(ring.begin(), ring.end(), [&](const auto& r) { return r[0] == b; });
    if (it == ring.end()) return false;  // open ring: boundary vertex
    ordered.push_back(*it);
  }
  if (ordered.back()[1] != ordered.front()[0]) return false;
  std::vector<double> angle;
  double total = 0;
  for (const auto& r : ordered) {
    const double a = m.edge_length[m.edge_index(v, r[0])];
    const double b = m.edge_length[m.edge_index(v, r[1])];
    const double c = m.edge_length[m.edge_index(r[0], r[1])];
    const double th = std::acos(std::clamp((a * a + b * b - c * c) / (2 * a * b), -1.0, 1.0));
    angle.push_back(th);
    total += th;
  }
  const double s = 2 * kPi / total;
  std::vector<double> dirs;
  double phi = 0;
  const double scale = u.cwiseAbs().maxCoeff();
  for (size_t i = 0; i < ordered.size(); ++i) {
    const auto& r = ordered[i];
    const double la = m.edge_length[m.edge_index(v, r[0])], lb = m.edge_length[m.edge_index(v, r[1])];
    const Vector2d A(la * std::cos(phi), la * std::sin(phi));
    phi += s * angle[i];
    const Vector2d B(lb * std::cos(phi), lb * std::sin(phi));
    Eigen::Matrix2d M;
    M << A.transpose(), B.transpose();
    const Vector2d g = M.inverse() * Vector2d(u[r[0]] - u[v], u[r[1]] - u[v]);
    if (g.norm() <= 1e-13 * std::max(scale, 1e-300) / std::max(la, lb)) return true;
    dirs.push_back(std::atan2(g.y(), g.x()));
  }
  std::sort(dirs.begin(), dirs.end());
  double gap = dirs.front() + 2 * kPi - dirs.back();
  for (size_t i = 1; i < dirs.size(); ++i) gap = std::max(gap, dirs[i] - dirs[i - 1]);
  return gap <= kPi + 1e-12;
}

nlohmann::json MorseReport::to_json() const {
  return {{"interior_critical", critical.size()},
          {"interior_off_fixed", interior_off_fixed},
          {"per_oval", per_oval},
          {"ovals", ovals},
          {"boundary_min_nonpositive", boundary_min_nonpositive},
          {"boundary_max_nonpositive", boundary_max_nonpositive},
          {"euler", euler},
          {"inequality", inequality},
          {"graph_structure", graph_structure}};
}

MorseReport morse_count_check(const VectorXd& u, const SymmetricMesh& m, const std::string& involution) {
  const int g = involution_index(m, involution);
  const double umax = u.cwiseAbs().maxCoeff();
  for (int v = 0; v < u.size(); ++v)
    if (std::abs(u[m.action.perms[g][v]] - u[v]) > 1e-6 * umax)
      throw Error(ErrorCode::NotEven, "function is not even under '" + involution + "'");
  const int nodal = nodal_domain_count(u, m);
  if (nodal != 2) throw Error(ErrorCode::NodalCountNotTwo, std::to_string(nodal) + " nodal domains");

  MorseReport rep;
  const auto bnd = boundary_flags(m);
  const auto fixed = fixed_vertices(m, involution);
  std::vector<char> is_fixed(m.num_vertices(), 0);
  for (int v : fixed) is_fixed[v] = 1;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!bnd[v] && is_critical_vertex(u, m, v)) {
      rep.critical.push_back(v);
      if (!is_fixed[v]) ++rep.interior_off_fixed;
    }
  const FixedComponents fc = fixed_components(m, fixed);
  rep.ovals = static_cast<int>(fc.ovals.size());
  for (const auto& oval : fc.ovals) {
    int c = 0;
    for (int v : oval) c += static_cast<int>(std::count(rep.critical.begin(), rep.critical.end(), v));
    rep.per_oval.push_back(c);
  }
  const double tol = 1e-10 * umax;
  for (const auto& loop : boundary_loops(m)) {
    const int L = static_cast<int>(loop.size());
    for (int i = 0; i < L; ++i) {
      const double a = u[loop[(i + L - 1) % L]], b = u[loop[i]], c = u[loop[(i + 1) % L]];
      if (b > tol) continue;
      if (b < a && b < c) ++rep.boundary_min_nonpositive;
      if (b > a && b > c) ++rep.boundary_max_nonpositive;
    }
  }
  rep.euler = euler_characteristic(m);
  rep.inequality = static_cast<int>(rep.critical.size()) + rep.euler <=
                   rep.boundary_min_nonpositive - rep.boundary_max_nonpositive;
  rep.graph_structure =
      rep.interior_off_fixed == 0 && std::all_of(rep.per_oval.begin(), rep.per_oval.end(), [](int c) { return c == 2; });
  return rep;
}

MatrixXd stereographic(const MatrixXd& points, const Eigen::Vector4d& pole) {
  if (points.cols() != 4) throw Error(ErrorCode::DimensionMismatch, "stereographic projection needs four coordinates");
  const Eigen::Vector4d p = pole.normalized();
  Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
  A.col(0) = p;
  const Eigen::Matrix4d Q = Eigen::HouseholderQR<Eigen::Matrix4d>(A).householderQ();
  MatrixXd out(points.rows(), 3);
  for (int v = 0; v < points.rows(); ++v) {
    const Eigen::Vector4d x = points.row(v).transpose().normalized();
    const double d = 1.0 - x.dot(p);
    if (d < 1e-9) throw Error(ErrorCode::PoleOnSurface, "image passes through the projection pole");
    for (int c = 0; c < 3; ++c) out(v, c) = x.dot(Q.col(c + 1)) / d;
  }
  return out;
}

Eigen::Vector4d farthest_pole(const MatrixXd& points) {
  std::vector<Eigen::Vector4d> cand;
  for (int i = 0; i < 4; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e[i] = s;
      cand.push_back(e);
    }
  for (int mask = 0; mask < 16; ++mask) {
    Eigen::Vector4d e;
    for (int i = 0; i < 4; ++i) e[i] = (mask >> i & 1) ? -0.5 : 0.5;
    cand.push_back(e);
  }
  Eigen::Vector4d best = cand[0];
  double best_d = -1;
  for (const auto& c : cand) {
    double d = 1e300;
    for (int v = 0; v < points.rows(); ++v) d = std::min(d, (Eigen::Vector4d(points.row(v)).normalized() - c).norm());
    if (d > best_d) best_d = d, best = c;
  }
  return best;
}

void export_obj(const std::string& path, const SymmetricMesh& m, const MatrixXd* map,
                const std::optional<Eigen::Vector4d>& pole) {
  if (!map) return write_obj(path, m);
  if (map->rows() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "map needs one row per vertex");
  MatrixXd X;
  if (map->cols() == 4) {
    X = stereographic(*map, pole ? *pole : farthest_pole(*map));
  } else if (map->cols() <= 3) {
    X = MatrixXd::Zero(map->rows(), 3);
    X.leftCols(map->cols()) = *map;
  } else {
    throw Error(ErrorCode::DimensionMismatch, "geometric export supports at most four coordinates");
  }
  std::vector<Vector3d> pos(X.rows());
  for (int v = 0; v < X.rows(); ++v) pos[v] = X.row(v).transpose();
  write_obj(path, m, &pos);
}

nlohmann::json StructureReport::to_json() const {
  nlohmann::json j{{"dimension", dimension},
                   {"even", even},
                   {"odd", odd},
                   {"parity_bounds", parity_bounds},
                   {"conformality", conformality},
                   {"norm_deviation", norm_deviation},
                   {"area", area.to_json()},
                   {"nodal_counts", nodal_counts},
                   {"notes", notes}};
  if (sheets) j["sheets"] = sheets->to_json();
  if (morse) j["morse"] = morse->to_json();
  return j;
}

StructureReport structure_report(const SymmetricMesh& m, const Spectrum& sp, const std::string& involution,
                                 int genus) {
  StructureReport r;
  const Eigenmap map = first_eigenmap(m, sp, involution);
  const bool closed = sp.kind == ProblemKind::Laplace;
  r.dimension = map.dim();
  r.even = map.even();
  r.odd = map.odd();
  r.parity_bounds = involution.empty() || (r.even <= (closed ? 3 : 2) && r.odd <= 1);
  if (map.dim() >= 2) r.conformality = conformality_residual(map.components, m, sp.kind == ProblemKind::Steklov);
  r.norm_deviation = norm_deviation(map, m);
  r.area = area_bound_check(map.components, m, closed, genus);
  for (int c = 0; c < map.dim(); ++c) r.nodal_counts.push_back(nodal_domain_count(map.basis.col(c), m));
  if (!involution.empty()) {
    try {
      r.sheets = doubling_projection_check(map, m);
    } catch (const Error& e) {
      r.notes.push_back(std::string("doubling check skipped: ") + e.what());
    }
    if (!closed)
      for (int c = 0; c < map.dim(); ++c)
        if (map.parity[c] == 1) {
          try {
            r.morse = morse_count_check(map.basis.col(c), m, involution);
          } catch (const Error& e) {
            r.notes.push_back(std::string("Morse check skipped: ") + e.what());
          }
          break;
        }
  }
  return r;
}

}  // namespace eigenmax
