#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <set>

#include "eigenmax/error.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

namespace {
constexpr double kPi = std::numbers::pi;

// Vertices within graph distance eps of p, measured with reference edge lengths.
std::set<int> metric_ball(const SymmetricMesh& m, const std::vector<std::vector<std::pair<int, double>>>& adj, int p,
                          double eps) {
  std::vector<double> dist(m.num_vertices(), 1e300);
  std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, std::greater<>> pq;
  dist[p] = 0;
  pq.push({0.0, p});
  std::set<int> out;
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    out.insert(v);
    for (auto [w, l] : adj[v])
      if (d + l < dist[w] && d + l < eps) {
        dist[w] = d + l;
        pq.push({dist[w], w});
      }
  }
  return out;
}

// Column map of a generator on a cylinder: must be a rotation or reflection of Z_m.
bool dihedral_map(const std::vector<int>& sigma) {
  const int m = static_cast<int>(sigma.size());
  const int step = ((sigma[1 % m] - sigma[0]) % m + m) % m;
  if (step != 1 && step != m - 1) return false;
  for (int i = 0; i < m; ++i)
    if (((sigma[(i + 1) % m] - sigma[i]) % m + m) % m != step) return false;
  return true;
}
}  // namespace

GluedMesh glue_cylinder(const SymmetricMesh& parent, const SymmetricMesh* attached, const GluedMetricSpec& spec) {
  if (spec.pairs.empty()) throw Error(ErrorCode::GluingMismatch, "no gluing pairs");
  if (!(spec.eps > 0) || !(spec.L > 0)) throw Error(ErrorCode::GluingMismatch, "eps and L must be positive");

  // Disjoint union of the pieces with merged actions.
  SymmetricMesh U = parent;
  const int np = parent.num_vertices();
  std::vector<std::string> names;
  std::vector<std::vector<int>> gens;
  std::vector<int> gen_parity;
  for (std::size_t g = 0; g < parent.action.generator_names.size(); ++g) {
    const std::string& name = parent.action.generator_names[g];
    const int pe = parent.action.generator_element[g];
    std::vector<int> perm = parent.action.perms[pe];
    if (attached) {
      const int ae = attached->action.find(name);
      if (ae < 0 || std::find(attached->action.generator_names.begin(), attached->action.generator_names.end(), name) ==
                        attached->action.generator_names.end())
        continue;
      for (int v : attached->action.perms[ae]) perm.push_back(v + np);
    }
    names.push_back(name);
    gens.push_back(std::move(perm));
    gen_parity.push_back(parent.action.parity[pe]);
  }
  if (attached) {
    for (const auto& p : attached->positions) U.positions.push_back(p);
    for (const auto& t : attached->triangles) U.triangles.push_back({t[0] + np, t[1] + np, t[2] + np});
    for (std::size_t e = 0; e < attached->edges.size(); ++e) {
      U.edges.push_back({attached->edges[e][0] + np, attached->edges[e][1] + np});
      U.edge_length.push_back(attached->edge_length[e]);
    }
    for (const auto& be : attached->boundary) U.boundary.push_back({be.a + np, be.b + np, be.label});
    U.density.insert(U.density.end(), attached->density.begin(), attached->density.end());
    U.action = GroupAction::trivial(U.num_vertices());
    const auto density = U.density;
    finalize_mesh(U);
    U.density = density;
  }
  const int nu = U.num_vertices();
  std::vector<std::pair<int, int>> pairs;
  for (auto [a, b] : spec.pairs) {
    const int bb = attached ? b + np : b;
    if (a < 0 || a >= np || bb < 0 || bb >= nu) throw Error(ErrorCode::BadIndex, "pair vertex out of range");
    pairs.push_back({a, bb});
  }

  // Excise the disks.
  std::vector<std::vector<std::pair<int, double>>> adj(nu);
  for (std::size_t e = 0; e < U.edges.size(); ++e) {
    adj[U.edges[e][0]].push_back({U.edges[e][1], U.edge_length[e]});
    adj[U.edges[e][1]].push_back({U.edges[e][0], U.edge_length[e]});
  }
  std::vector<int> owner(nu, -1);  // disk index of excised vertices
  std::vector<int> centers;
  for (auto [a, b] : pairs) {
    centers.push_back(a);
    centers.push_back(b);
  }
  for (std::size_t d = 0; d < centers.size(); ++d)
    for (int v : metric_ball(U, adj, centers[d], spec.eps)) {
      if (owner[v] >= 0) throw Error(ErrorCode::OverlappingDisks, "excised disks overlap");
      owner[v] = static_cast<int>(d);
    }
  std::set<int> boundary_vertices;
  for (const auto& be : U.boundary) boundary_vertices.insert(be.a);
  GluedMesh out;
  std::vector<std::array<int, 3>> kept;
  std::vector<int> touched_by(U.num_triangles(), -1);
  for (int t = 0; t < U.num_triangles(); ++t) {
    int d = -1;
    for (int v : U.triangles[t])
      if (owner[v] >= 0) {
        if (d >= 0 && d != owner[v]) throw Error(ErrorCode::OverlappingDisks, "excised disks share a triangle");
        d = owner[v];
      }
    if (d < 0) {
      kept.push_back(U.triangles[t]);
    } else {
      out.excised_area += U.triangle_area(t);
      touched_by[t] = d;
    }
  }
  // Rim vertices of each disk must not touch the original boundary or another rim.
  std::vector<int> rim_owner(nu, -1);
  for (int t = 0; t < U.num_triangles(); ++t) {
    if (touched_by[t] < 0) continue;
    for (int v : U.triangles[t]) {
      if (owner[v] >= 0) continue;
      if (boundary_vertices.count(v)) throw Error(ErrorCode::OverlappingDisks, "excised disk reaches the boundary");
      if (rim_owner[v] >= 0 && rim_owner[v] != touched_by[t])
        throw Error(ErrorCode::OverlappingDisks, "excised disks are adjacent");
      rim_owner[v] = touched_by[t];
    }
  }

  // Compact kept vertices.
  SymmetricMesh M;
  std::vector<int> remap(nu, -1);
  for (int v = 0; v < nu; ++v)
    if (owner[v] < 0) {
      remap[v] = M.num_vertices();
      M.positions.push_back(U.positions[v]);
      M.density.push_back(U.density[v]);
    }
  for (const auto& t : kept) M.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
  for (std::size_t e = 0; e < U.edges.size(); ++e) {
    const int a = remap[U.edges[e][0]], b = remap[U.edges[e][1]];
    if (a < 0 || b < 0) continue;
    M.edges.push_back({std::min(a, b), std::max(a, b)});
    M.edge_length.push_back(U.edge_length[e]);
  }
  for (const auto& be : U.boundary) M.boundary.push_back({remap[be.a], remap[be.b], be.label});
  {
    const auto density = M.density;
    finalize_mesh(M);
    M.density = density;
  }
  std::vector<int> back(M.num_vertices());
  for (int u = 0; u < nu; ++u)
    if (remap[u] >= 0) back[remap[u]] = u;

  // Identify the rim loop of each disk.
  std::vector<std::vector<int>> rim(centers.size());
  for (const auto& loop : boundary_loops(M)) {
    int d = -1;
    for (int v : loop) {
      const int orig = back[v];
      if (rim_owner[orig] >= 0) {
        if (d >= 0 && d != rim_owner[orig]) throw Error(ErrorCode::OverlappingDisks, "rims merged");
        d = rim_owner[orig];
      } else if (d >= 0) {
        throw Error(ErrorCode::OverlappingDisks, "rim mixes with another boundary");
      }
    }
    if (d < 0) continue;
    if (!rim[d].empty()) throw Error(ErrorCode::OverlappingDisks, "excised disk leaves more than one loop");
    rim[d] = loop;
  }
  for (const auto& r : rim)
    if (r.empty()) throw Error(ErrorCode::OverlappingDisks, "excised disk left no boundary loop");

  auto gen_on_kept = [&](int g, int v) { return remap[gens[g][back[v]]]; };

  // Cylinders.
  const int n_cyl = static_cast<int>(pairs.size());
  struct Cyl {
    int m = 0, rows = 0;
    std::vector<int> ring0, ring_end;
    std::vector<std::vector<int>> ring;  // rows + 1 rings of m vertices
    std::vector<std::vector<int>> center;
    double radius = 0, length = 0;
  };
  std::vector<Cyl> cyl(n_cyl);
  for (int c = 0; c < n_cyl; ++c) {
    const auto& L0 = rim[2 * c];
    const auto& L1 = rim[2 * c + 1];
    if (L0.size() != L1.size()) throw Error(ErrorCode::GluingMismatch, "excised circles have different vertex counts");
    Cyl& C = cyl[c];
    C.m = static_cast<int>(L0.size());
    for (int i = 0; i < C.m; ++i) C.ring0.push_back(L0[(C.m - i) % C.m]);
    double perim = 0;
    for (int i = 0; i < C.m; ++i) perim += M.edge_length[M.edge_index(L0[i], L0[(i + 1) % C.m])];
    C.radius = perim / (2 * kPi);
    C.length = spec.L * C.radius;
    C.rows = std::max(1, static_cast<int>(std::ceil(C.m * spec.L / (2 * kPi) - 1e-9)));
  }

  // Column maps: g(ring0_c[i]) = ring0_{c'}[sigma(i)].
  const int ngen = static_cast<int>(gens.size());
  std::vector<std::vector<int>> cyl_image(ngen, std::vector<int>(n_cyl));
  std::vector<std::vector<std::vector<int>>> sigma(ngen, std::vector<std::vector<int>>(n_cyl));
  for (int g = 0; g < ngen; ++g)
    for (int c = 0; c < n_cyl; ++c) {
      const int img0 = gen_on_kept(g, cyl[c].ring0[0]);
      int target = -1;
      for (int c2 = 0; c2 < n_cyl && target < 0; ++c2)
        if (std::find(cyl[c2].ring0.begin(), cyl[c2].ring0.end(), img0) != cyl[c2].ring0.end()) target = c2;
      if (target < 0)
        throw Error(ErrorCode::NonEquivariantPairing, "generator " + names[g] + " moves a pair off the pairing");
      cyl_image[g][c] = target;
      std::vector<int>& s = sigma[g][c];
      for (int i = 0; i < cyl[c].m; ++i) {
        const int img = gen_on_kept(g, cyl[c].ring0[i]);
        const auto& R = cyl[target].ring0;
        auto it = std::find(R.begin(), R.end(), img);
        if (it == R.end()) throw Error(ErrorCode::NonEquivariantPairing, "generator does not preserve a rim");
        s.push_back(static_cast<int>(it - R.begin()));
      }
      if (!dihedral_map(s)) throw Error(ErrorCode::NonEquivariantPairing, "generator is not an isometry of a rim");
    }
  // Offset search: ring_end[i] = L1[(s + i) mod m] must transform with the same column map.
  for (int c = 0; c < n_cyl; ++c) {
    Cyl& C = cyl[c];
    const auto& L1 = rim[2 * c + 1];
    bool found = false;
    for (int s = 0; s < C.m && !found; ++s) {
      std::vector<int> end(C.m);
      for (int i = 0; i < C.m; ++i) end[i] = L1[(s + i) % C.m];
      bool ok = true;
      for (int g = 0; g < ngen && ok; ++g) {
        if (cyl_image[g][c] != c) continue;
        for (int i = 0; i < C.m && ok; ++i) ok = gen_on_kept(g, end[i]) == end[sigma[g][c][i]];
      }
      if (ok) {
        C.ring_end = end;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::NonEquivariantPairing, "no rim alignment commutes with the action");
  }
  for (int g = 0; g < ngen; ++g)
    for (int c = 0; c < n_cyl; ++c) {
      const int c2 = cyl_image[g][c];
      for (int i = 0; i < cyl[c].m; ++i)
        if (gen_on_kept(g, cyl[c].ring_end[i]) != cyl[c2].ring_end[sigma[g][c][i]])
          throw Error(ErrorCode::NonEquivariantPairing, "pairs are exchanged inconsistently");
    }

  // Build cylinder vertices and triangles.
  for (auto& C : cyl) {
    const double dth = 2 * kPi * C.radius / C.m, dt = C.length / C.rows;
    C.ring.assign(C.rows + 1, {});
    C.ring[0] = C.ring0;
    C.ring[C.rows] = C.ring_end;
    for (int j = 1; j < C.rows; ++j)
      for (int i = 0; i < C.m; ++i) {
        const double w = static_cast<double>(j) / C.rows;
        C.ring[j].push_back(M.num_vertices());
        M.positions.push_back((1 - w) * M.positions[C.ring0[i]] + w * M.positions[C.ring_end[i]]);
        M.density.push_back(1.0);
      }
    C.center.assign(C.rows, {});
    for (int j = 0; j < C.rows; ++j)
      for (int i = 0; i < C.m; ++i) {
        const int a = C.ring[j][i], b = C.ring[j][(i + 1) % C.m], c = C.ring[j + 1][(i + 1) % C.m],
                  d = C.ring[j + 1][i];
        const int x = M.num_vertices();
        C.center[j].push_back(x);
        M.positions.push_back(0.25 * (M.positions[a] + M.positions[b] + M.positions[c] + M.positions[d]));
        M.density.push_back(1.0);
        M.triangles.push_back({a, b, x});
        M.triangles.push_back({b, c, x});
        M.triangles.push_back({c, d, x});
        M.triangles.push_back({d, a, x});
        const double half = 0.5 * std::hypot(dth, dt);
        for (int q : {a, b, c, d}) {
          M.edges.push_back({std::min(q, x), std::max(q, x)});
          M.edge_length.push_back(half);
        }
        if (j > 0) {
          M.edges.push_back({std::min(a, b), std::max(a, b)});
          M.edge_length.push_back(dth);
        }
        if (j + 1 < C.rows) {
          M.edges.push_back({std::min(c, d), std::max(c, d)});
          M.edge_length.push_back(dth);
        }
        M.edges.push_back({std::min(b, c), std::max(b, c)});
        M.edge_length.push_back(dt);
      }
    out.cylinder_radius.push_back(C.radius);
  }
  // Interior ring edges are listed twice; keep one copy.
  {
    std::map<std::pair<int, int>, double> first;
    std::vector<std::array<int, 2>> edges;
    std::vector<double> lengths;
    for (std::size_t e = 0; e < M.edges.size(); ++e) {
      auto key = std::make_pair(M.edges[e][0], M.edges[e][1]);
      if (first.count(key)) continue;
      first[key] = M.edge_length[e];
      edges.push_back(M.edges[e]);
      lengths.push_back(M.edge_length[e]);
    }
    M.edges = edges;
    M.edge_length = lengths;
    const auto density = M.density;
    finalize_mesh(M);
    M.density = density;
  }
  if (!is_manifold(M)) throw Error(ErrorCode::GluingMismatch, "glued mesh is not a manifold");
  if (!is_consistently_oriented(M)) throw Error(ErrorCode::GluingMismatch, "glued mesh orientation is inconsistent");
  // Extend the generators.
  std::vector<std::vector<int>> new_gens;
  for (int g = 0; g < ngen; ++g) {
    std::vector<int> perm(M.num_vertices(), -1);
    for (int u = 0; u < nu; ++u)
      if (remap[u] >= 0) perm[remap[u]] = remap[gens[g][u]];
    for (int c = 0; c < n_cyl; ++c) {
      const Cyl& C = cyl[c];
      const Cyl& D = cyl[cyl_image[g][c]];
      const auto& s = sigma[g][c];
      const bool reflect = ((s[1 % C.m] - s[0]) % C.m + C.m) % C.m != 1;
      for (int j = 1; j < C.rows; ++j)
        for (int i = 0; i < C.m; ++i) perm[C.ring[j][i]] = D.ring[j][s[i]];
      for (int j = 0; j < C.rows; ++j)
        for (int i = 0; i < C.m; ++i) perm[C.center[j][i]] = D.center[j][reflect ? s[(i + 1) % C.m] : s[i]];
    }
    new_gens.push_back(std::move(perm));
  }
  M.action = GroupAction::generate(M.num_vertices(), names, new_gens, gen_parity);
  M.descriptor = {{"glued", true}, {"pairs", spec.pairs.size()}, {"eps", spec.eps}, {"L", spec.L}};
  for (int t = static_cast<int>(kept.size()); t < M.num_triangles(); ++t) out.cylinder_area += M.triangle_area(t);
  out.mesh = std::move(M);
  return out;
}

}  // namespace eigenmax
