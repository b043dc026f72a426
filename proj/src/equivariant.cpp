#include "eigenmax/equivariant.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>

#include "eigenmax/error.hpp"

namespace eigenmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string ParityLabel::sign_string() const {
  std::string s;
  for (int v : signs) s += v > 0 ? '+' : '-';
  return s;
}

ParityLabel ParityLabel::make(const std::vector<std::string>& involutions, const std::string& signs) {
  if (signs.size() != involutions.size())
    throw Error(ErrorCode::DimensionMismatch, "one sign per involution is required");
  ParityLabel l;
  l.involutions = involutions;
  for (char c : signs) {
    if (c != '+' && c != '-') throw Error(ErrorCode::ParseError, std::string("bad sign '") + c + "'");
    l.signs.push_back(c == '+' ? 1 : -1);
  }
  return l;
}

std::vector<ParityLabel> ParityLabel::all(const std::vector<std::string>& involutions) {
  const int k = static_cast<int>(involutions.size());
  std::vector<ParityLabel> out;
  for (int mask = 0; mask < (1 << k); ++mask) {
    std::string s;
    for (int i = 0; i < k; ++i) s += (mask >> (k - 1 - i)) & 1 ? '-' : '+';
    out.push_back(make(involutions, s));
  }
  return out;
}

VectorXd average_invariant(const SymmetricMesh& m, const VectorXd& f) {
  if (f.size() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "field size differs from vertex count");
  // One sum per orbit, copied to every member, so the result is invariant bit for bit.
  VectorXd out(f.size());
  std::vector<char> done(f.size(), 0);
  for (int v = 0; v < f.size(); ++v) {
    if (done[v]) continue;
    double s = 0;
    for (const auto& p : m.action.perms) s += f[p[v]];
    s /= static_cast<double>(m.action.size());
    for (const auto& p : m.action.perms) {
      out[p[v]] = s;
      done[p[v]] = 1;
    }
  }
  return out;
}

std::vector<int> check_label(const SymmetricMesh& m, const ParityLabel& label) {
  if (label.signs.size() != label.involutions.size())
    throw Error(ErrorCode::DimensionMismatch, "one sign per involution is required");
  std::vector<int> ids;
  const int n = m.num_vertices();
  for (const auto& name : label.involutions) {
    const int g = m.action.find(name);
    if (g < 0) throw Error(ErrorCode::NotInvolution, "'" + name + "' is not an element of the action");
    const auto& p = m.action.perms[g];
    bool identity = true, square = true;
    for (int v = 0; v < n; ++v) {
      identity = identity && p[v] == v;
      square = square && p[p[v]] == v;
    }
    if (identity || !square) throw Error(ErrorCode::NotInvolution, "'" + name + "' is not an involution");
    ids.push_back(g);
  }
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const auto &a = m.action.perms[ids[i]], &b = m.action.perms[ids[j]];
      for (int v = 0; v < n; ++v)
        if (a[b[v]] != b[a[v]])
          throw Error(ErrorCode::NonCommuting, label.involutions[i] + " and " + label.involutions[j] + " do not commute");
    }
  return ids;
}

namespace {

// Elements of the subgroup generated by the label's involutions with their character values.
struct Character {
  std::vector<std::vector<int>> perms;  // perms[0] is the identity
  std::vector<int> sign;
};

Character character_of(const SymmetricMesh& m, const ParityLabel& label) {
  const auto ids = check_label(m, label);
  const int n = m.num_vertices();
  std::map<std::vector<int>, int> seen;
  Character c;
  for (int mask = 0; mask < (1 << ids.size()); ++mask) {
    std::vector<int> p(n);
    for (int v = 0; v < n; ++v) p[v] = v;
    int s = 1;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if ((mask >> i) & 1) {
        const auto& g = m.action.perms[ids[i]];
        for (int v = 0; v < n; ++v) p[v] = g[p[v]];
        s *= label.signs[i];
      }
    auto [it, fresh] = seen.emplace(p, s);
    if (!fresh) {
      if (it->second != s) throw Error(ErrorCode::WrongParitySplit, "parity label is inconsistent on " + label.sign_string());
      continue;
    }
    c.perms.push_back(std::move(p));
    c.sign.push_back(s);
  }
  return c;
}

}  // namespace

ReducedPencil sector_pencil(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc) {
  const Character ch = character_of(m, label);
  const ReducedPencil full = reduce_problem(m, bc);
  const int n = m.num_vertices();
  const int nf = static_cast<int>(full.K.rows());
  std::vector<int> pos(n, -1), vert(nf);
  for (int k = 0; k < full.expand.outerSize(); ++k)
    for (SpMat::InnerIterator it(full.expand, k); it; ++it) {
      pos[it.row()] = static_cast<int>(it.col());
      vert[it.col()] = static_cast<int>(it.row());
    }

  // One column per orbit whose stabilizer lies in the kernel of the character.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> rep;
  std::vector<double> rep_coeff;
  std::vector<char> done(nf, 0);
  for (int i = 0; i < nf; ++i) {
    if (done[i]) continue;
    std::map<int, double> col;
    for (std::size_t h = 0; h < ch.perms.size(); ++h) {
      const int j = pos[ch.perms[h][vert[i]]];
      if (j < 0) throw Error(ErrorCode::NonInvariantDensity, "boundary conditions are not invariant under the label");
      col[j] += ch.sign[h];
      done[j] = 1;
    }
    bool nonzero = false;
    for (const auto& [j, c] : col) nonzero = nonzero || c != 0.0;
    if (!nonzero) continue;
    const int c_idx = static_cast<int>(rep.size());
    for (const auto& [j, c] : col)
      if (c != 0.0) trip.emplace_back(j, c_idx, c);
    rep.push_back(i);
    rep_coeff.push_back(col[i]);
  }
  const int ns = static_cast<int>(rep.size());
  if (ns == 0) throw Error(ErrorCode::AllDirichlet, "sector " + label.sign_string() + " is empty");
  SpMat Q(nf, ns);
  Q.setFromTriplets(trip.begin(), trip.end());

  ReducedPencil p;
  p.kind = full.kind;
  p.normalizer = full.normalizer;
  p.K = SpMat(Q.transpose()) * full.K * Q;
  p.mass = Q.cwiseAbs2().transpose() * full.mass;
  p.expand = full.expand * Q;

  // Kernel of the sector: character projection of the full kernel, re-orthonormalized.
  MatrixXd C = MatrixXd::Zero(ns, full.kernel.cols());
  for (int q = 0; q < full.kernel.cols(); ++q) {
    VectorXd s = VectorXd::Zero(nf);
    for (std::size_t h = 0; h < ch.perms.size(); ++h)
      for (int i = 0; i < nf; ++i) s[i] += ch.sign[h] * full.kernel(pos[ch.perms[h][vert[i]]], q);
    s /= static_cast<double>(ch.perms.size());
    for (int j = 0; j < ns; ++j) C(j, q) = s[rep[j]] / rep_coeff[j];
  }
  if (C.cols() > 0) {
    MatrixXd G = C.transpose() * p.mass.asDiagonal() * C;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (G + G.transpose()));
    const double top = es.eigenvalues().maxCoeff();
    std::vector<int> keep;
    for (int c = 0; c < G.cols(); ++c)
      if (top > 0 && es.eigenvalues()[c] > 1e-10 * top) keep.push_back(c);
    p.kernel.resize(ns, static_cast<int>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c)
      p.kernel.col(c) = C * es.eigenvectors().col(keep[c]) / std::sqrt(es.eigenvalues()[keep[c]]);
  } else {
    p.kernel.resize(ns, 0);
  }
  return p;
}

std::optional<HalfMesh> half_mesh(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc) {
  const Character ch = character_of(m, label);
  const int order = static_cast<int>(ch.perms.size());
  const int T = m.num_triangles();
  if (T % order != 0) return std::nullopt;

  // Mirror edges: fixed pointwise by a nontrivial element.
  std::vector<int> fixer(m.edges.size(), -1);
  for (std::size_t e = 0; e < m.edges.size(); ++e)
    for (int h = 1; h < order; ++h)
      if (ch.perms[h][m.edges[e][0]] == m.edges[e][0] && ch.perms[h][m.edges[e][1]] == m.edges[e][1]) fixer[e] = h;
  std::vector<std::vector<int>> edge_tris(m.edges.size());
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < 3; ++k) edge_tris[m.tri_edges[t][k]].push_back(t);

  std::vector<char> in(T, 0);
  std::vector<int> region{0}, stack{0};
  in[0] = 1;
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int k = 0; k < 3; ++k) {
      const int e = m.tri_edges[t][k];
      if (fixer[e] >= 0) continue;
      for (int u : edge_tris[e])
        if (!in[u]) {
          in[u] = 1;
          region.push_back(u);
          stack.push_back(u);
        }
    }
  }
  if (static_cast<int>(region.size()) * order != T) return std::nullopt;
  std::set<std::array<int, 3>> keys;
  for (int t : region) {
    auto s = m.triangles[t];
    std::sort(s.begin(), s.end());
    keys.insert(s);
  }
  for (int t : region)
    for (int h = 1; h < order; ++h) {
      std::array<int, 3> s{ch.perms[h][m.triangles[t][0]], ch.perms[h][m.triangles[t][1]], ch.perms[h][m.triangles[t][2]]};
      std::sort(s.begin(), s.end());
      if (keys.count(s)) return std::nullopt;
    }

  HalfMesh out;
  std::vector<int> local(m.num_vertices(), -1);
  for (int t : region) {
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const int v = m.triangles[t][k];
      if (local[v] < 0) {
        local[v] = static_cast<int>(out.parent_vertex.size());
        out.parent_vertex.push_back(v);
        out.mesh.positions.push_back(m.positions[v]);
      }
      tri[k] = local[v];
    }
    out.mesh.triangles.push_back(tri);
  }
  finalize_mesh(out.mesh);
  for (std::size_t e = 0; e < out.mesh.edges.size(); ++e)
    out.mesh.edge_length[e] = m.edge_length[m.edge_index(out.parent_vertex[out.mesh.edges[e][0]],
                                                         out.parent_vertex[out.mesh.edges[e][1]])];
  out.mesh.density.resize(out.parent_vertex.size());
  for (std::size_t v = 0; v < out.parent_vertex.size(); ++v) out.mesh.density[v] = m.density[out.parent_vertex[v]];

  std::map<std::pair<int, int>, PanelLabel> original;
  for (const auto& be : m.boundary) original[{std::min(be.a, be.b), std::max(be.a, be.b)}] = be.label;
  constexpr int kMirrorBase = 100;  // local mirror labels stay clear of the generator indices
  relabel_boundary(out.mesh, [&](int a, int b) {
    const int pa = out.parent_vertex[a], pb = out.parent_vertex[b];
    auto it = original.find({std::min(pa, pb), std::max(pa, pb)});
    if (it != original.end()) return it->second;
    PanelLabel l;
    l.kind = PanelLabel::Mirror;
    l.index = kMirrorBase + fixer[m.edge_index(pa, pb)];
    return l;
  });
  out.bc = bc;
  for (int h = 1; h < order; ++h) {
    PanelLabel l;
    l.kind = PanelLabel::Mirror;
    l.index = kMirrorBase + h;
    out.bc.by_label[l.str()] = ch.sign[h] > 0 ? BC::Neumann : BC::Dirichlet;
  }
  return out;
}

Spectrum labeled_spectrum(const SymmetricMesh& m, const ParityLabel& label, const BoundaryConditionMap& bc, int count,
                          const SolverOptions& opts, ReductionRoute route) {
  if (route != ReductionRoute::Projection) {
    auto hm = half_mesh(m, label, bc);
    if (hm) {
      Spectrum sp = mixed_spectrum(hm->mesh, hm->bc, count, opts);
      sp.normalizer = reduce_problem(m, bc).normalizer;
      return sp;
    }
    if (route == ReductionRoute::HalfMesh)
      throw Error(ErrorCode::WrongParitySplit, "mirror edges do not cut out a fundamental domain");
  }
  return solve_reduced(sector_pencil(m, label, bc), count, opts);
}

double labeled_first(const SymmetricMesh& m, const ParityLabel& label, ProblemKind kind, const SolverOptions& opts,
                     ReductionRoute route) {
  return labeled_spectrum(m, label, BoundaryConditionMap::for_kind(kind), 1, opts, route).first_nonzero();
}

std::pair<Spectrum, Spectrum> parity_split_spectrum(const SymmetricMesh& m, const std::string& involution, int count,
                                                    ProblemKind kind, const SolverOptions& opts) {
  const auto bc = BoundaryConditionMap::for_kind(kind);
  return {labeled_spectrum(m, ParityLabel::make({involution}, "+"), bc, count, opts, ReductionRoute::Projection),
          labeled_spectrum(m, ParityLabel::make({involution}, "-"), bc, count, opts, ReductionRoute::Projection)};
}

ClusterParity invariant_multiplicity(const Spectrum& sp, const SymmetricMesh& m, int cluster,
                                     const std::string& involution, double threshold) {
  const auto cl = sp.clusters();
  if (cluster < 0 || cluster >= static_cast<int>(cl.size())) throw Error(ErrorCode::BadIndex, "cluster index out of range");
  const int g = check_label(m, ParityLabel::make({involution}, "+"))[0];
  const auto& p = m.action.perms[g];
  const auto& idx = cl[cluster];
  const int d = static_cast<int>(idx.size());
  const VectorXd w = sp.kind == ProblemKind::Laplace ? mass_diagonal(m)
                                                     : boundary_mass_diagonal(m, std::vector<PanelLabel>{PanelLabel{}});
  MatrixXd U(m.num_vertices(), d), PU(m.num_vertices(), d);
  for (int c = 0; c < d; ++c) {
    U.col(c) = sp.eigenvectors.col(idx[c]);
    for (int v = 0; v < m.num_vertices(); ++v) PU(v, c) = U(p[v], c);
  }
  MatrixXd G = U.transpose() * w.asDiagonal() * U;
  MatrixXd T = U.transpose() * w.asDiagonal() * PU;
  T = 0.5 * (T + T.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(T, 0.5 * (G + G.transpose()));
  ClusterParity out;
  out.dimension = d;
  for (int c = 0; c < d; ++c) {
    const double s = es.eigenvalues()[c];
    if (s > threshold)
      ++out.even;
    else if (s < -threshold)
      ++out.odd;
    else
      ++out.mixed;
  }
  return out;
}

nlohmann::json labeled_spectra_json(const SymmetricMesh& m, const std::vector<std::string>& involutions,
                                    ProblemKind kind, int count, const SolverOptions& opts) {
  const auto labels = ParityLabel::all(involutions);
  const auto bc = BoundaryConditionMap::for_kind(kind);
  std::vector<nlohmann::json> results(labels.size());
  const int workers = std::max(1, std::min(static_cast<int>(labels.size()), max_jobs()));
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < workers; ++t)
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < labels.size(); i += workers) {
        nlohmann::json j;
        try {
          const Spectrum sp = labeled_spectrum(m, labels[i], bc, count, opts);
          j = sp.to_json();
          if (sp.zero_modes < sp.size()) j["first"] = sp.first_nonzero();
        } catch (const Error& e) {
          j["error"] = error_name(e.code());
        }
        results[i] = std::move(j);
      }
    }));
  for (auto& j : jobs) j.get();
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i].sign_string()] = results[i];
  return out;
}

}  // namespace eigenmax
