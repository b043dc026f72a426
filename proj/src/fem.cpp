#include "eigenmax/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "eigenmax/error.hpp"

namespace eigenmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SpMat assemble_stiffness(const SymmetricMesh& m) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.triangles.size() * 12);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto l = m.triangle_lengths(t);
    const double A = m.triangle_area(t);
    if (!(A > 0)) throw Error(ErrorCode::DegenerateTriangle, "triangle " + std::to_string(t) + " has zero area");
    for (int k = 0; k < 3; ++k) {
      const double a = l[k], b = l[(k + 1) % 3], c = l[(k + 2) % 3];
      const double w = (b * b + c * c - a * a) / (8.0 * A);  // cot(angle k) / 2
      const int i = m.triangles[t][(k + 1) % 3], j = m.triangles[t][(k + 2) % 3];
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
    }
  }
  SpMat K(m.num_vertices(), m.num_vertices());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

VectorXd mass_diagonal(const SymmetricMesh& m) {
  VectorXd d = VectorXd::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double a = m.triangle_area(t) / 3.0;
    for (int v : m.triangles[t]) d[v] += a;
  }
  for (int v = 0; v < m.num_vertices(); ++v) d[v] *= m.density[v];
  return d;
}

namespace {
SpMat diagonal_matrix(const VectorXd& d) {
  SpMat D(d.size(), d.size());
  D.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (int i = 0; i < d.size(); ++i) D.insert(i, i) = d[i];
  D.makeCompressed();
  return D;
}
}  // namespace

SpMat assemble_mass(const SymmetricMesh& m) { return diagonal_matrix(mass_diagonal(m)); }

VectorXd boundary_mass_diagonal(const SymmetricMesh& m, const std::vector<PanelLabel>& panels) {
  VectorXd d = VectorXd::Zero(m.num_vertices());
  for (const auto& be : m.boundary) {
    if (std::find(panels.begin(), panels.end(), be.label) == panels.end()) continue;
    const double half = 0.5 * m.edge_length[m.edge_index(be.a, be.b)];
    d[be.a] += half;
    d[be.b] += half;
  }
  for (int v = 0; v < m.num_vertices(); ++v) d[v] *= std::sqrt(m.density[v]);
  return d;
}

SpMat assemble_boundary_mass(const SymmetricMesh& m, const std::vector<PanelLabel>& panels) {
  return diagonal_matrix(boundary_mass_diagonal(m, panels));
}

// --- boundary conditions ------------------------------------------------------

BC BoundaryConditionMap::of(const PanelLabel& l) const {
  auto it = by_label.find(l.str());
  if (it != by_label.end()) return it->second;
  if (l.kind == PanelLabel::Mirror) {
    it = by_label.find("mirror");
    if (it != by_label.end()) return it->second;
  }
  return fallback;
}

bool BoundaryConditionMap::has(BC bc) const {
  if (fallback == bc) return true;
  for (const auto& [k, v] : by_label)
    if (v == bc) return true;
  return false;
}

BoundaryConditionMap BoundaryConditionMap::for_kind(ProblemKind kind) {
  BoundaryConditionMap b;
  if (kind == ProblemKind::Steklov) b.by_label["outer"] = BC::Steklov;
  return b;
}

BoundaryConditionMap BoundaryConditionMap::parse(const std::string& s) {
  BoundaryConditionMap b;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "boundary condition '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
    BC bc;
    if (val == "neumann")
      bc = BC::Neumann;
    else if (val == "dirichlet")
      bc = BC::Dirichlet;
    else if (val == "steklov")
      bc = BC::Steklov;
    else
      throw Error(ErrorCode::ParseError, "unknown boundary condition '" + val + "'");
    if (key == "default")
      b.fallback = bc;
    else
      b.by_label[key] = bc;
  }
  return b;
}

std::string BoundaryConditionMap::str() const {
  auto name = [](BC b) { return b == BC::Neumann ? "neumann" : b == BC::Dirichlet ? "dirichlet" : "steklov"; };
  std::string s;
  for (const auto& [k, v] : by_label) s += k + "=" + name(v) + ",";
  return s + "default=" + name(fallback);
}

// --- spectra ------------------------------------------------------------------

double Spectrum::first_nonzero() const {
  if (zero_modes >= size()) throw Error(ErrorCode::NoConvergence, "no nonzero eigenvalue computed");
  return eigenvalues[zero_modes];
}

std::vector<std::vector<int>> Spectrum::clusters() const {
  std::vector<std::vector<int>> out;
  if (zero_modes > 0) {
    out.emplace_back();
    for (int i = 0; i < zero_modes; ++i) out.back().push_back(i);
  }
  for (int i = zero_modes; i < size(); ++i) {
    if (i > zero_modes) {
      const double gap = (eigenvalues[i] - eigenvalues[i - 1]) / std::max(std::abs(eigenvalues[i]), 1e-300);
      if (gap <= cluster_tolerance) {
        out.back().push_back(i);
        continue;
      }
    }
    out.push_back({i});
  }
  return out;
}

std::vector<int> Spectrum::first_cluster() const {
  for (const auto& c : clusters())
    if (c.front() >= zero_modes) return c;
  return {};
}

nlohmann::json Spectrum::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == ProblemKind::Laplace ? "laplace" : "steklov";
  j["eigenvalues"] = eigenvalues;
  j["zero_modes"] = zero_modes;
  if (zero_modes < size()) j["normalized_first"] = normalized_first();
  nlohmann::json cl = nlohmann::json::array();
  for (const auto& c : clusters()) cl.push_back({c.front(), c.back()});
  j["clusters"] = cl;
  j["normalizer"] = normalizer;
  j["residuals"] = residuals;
  j["iterations"] = iterations;
  return j;
}

namespace {

struct Eigenpairs {
  std::vector<double> values;
  MatrixXd vectors;
  std::vector<double> residuals;
  int iterations = 0;
};

double rel_residual(const SpMat& K, const SpMat& M, const VectorXd& x, double t) {
  const VectorXd kx = K * x, mx = M * x;
  const double den = kx.norm() + std::abs(t) * mx.norm();
  return den > 0 ? (kx - t * mx).norm() / den : 0.0;
}

void deflate(MatrixXd& Y, const SpMat& M, const MatrixXd& Z) {
  if (Z.cols() == 0) return;
  Y -= Z * (Z.transpose() * (M * Y));
}

// M-orthonormalize the columns of Y (two passes of Cholesky QR, with an eigen-based rescue).
void orthonormalize(MatrixXd& Y, const SpMat& M, const MatrixXd& Z, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  for (int attempt = 0; attempt < 6; ++attempt) {
    bool ok = true;
    for (int pass = 0; pass < 2 && ok; ++pass) {
      MatrixXd G = Y.transpose() * (M * Y);
      G = 0.5 * (G + G.transpose());
      Eigen::LLT<MatrixXd> llt(G);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Y = llt.matrixL().solve(Y.transpose()).transpose();
    }
    if (ok) {
      MatrixXd G = Y.transpose() * (M * Y);
      if ((G - MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-8) return;
    }
    MatrixXd G = Y.transpose() * (M * Y);
    G = 0.5 * (G + G.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    const double top = std::max(es.eigenvalues().maxCoeff(), 1e-300);
    MatrixXd fresh = Y;
    int kept = 0;
    for (int c = static_cast<int>(G.cols()) - 1; c >= 0; --c)
      if (es.eigenvalues()[c] > 1e-10 * top)
        fresh.col(kept++) = Y * es.eigenvectors().col(c) / std::sqrt(es.eigenvalues()[c]);
    for (int c = kept; c < fresh.cols(); ++c)
      for (int r = 0; r < fresh.rows(); ++r) fresh(r, c) = normal(rng);
    Y = fresh;
    deflate(Y, M, Z);
  }
  throw Error(ErrorCode::SingularMass, "could not orthonormalize the iteration block");
}

Eigenpairs dense_pairs(const SpMat& K, const SpMat& M, int count) {
  const MatrixXd Kd = MatrixXd(K), Md = MatrixXd(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(0.5 * (Kd + Kd.transpose()), 0.5 * (Md + Md.transpose()));
  if (es.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "dense generalized eigensolver failed");
  Eigenpairs out;
  count = std::min<int>(count, static_cast<int>(K.rows()));
  for (int i = 0; i < count; ++i) out.values.push_back(es.eigenvalues()[i]);
  out.vectors = es.eigenvectors().leftCols(count);
  for (int i = 0; i < count; ++i) out.residuals.push_back(rel_residual(K, M, out.vectors.col(i), out.values[i]));
  return out;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz, deflating the M-orthonormal columns of Z.
Eigenpairs subspace_iteration(const SpMat& K, const SpMat& M, int count, const MatrixXd& Z, const SolverOptions& opts) {
  const int n = static_cast<int>(K.rows());
  const int avail = n - static_cast<int>(Z.cols());
  count = std::min(count, avail);
  Eigenpairs out;
  if (count <= 0) return out;
  const int p = std::min(std::max(2 * count, count + 8), avail);
  double trK = 0, trM = 0;
  for (int i = 0; i < n; ++i) {
    trK += K.coeff(i, i);
    trM += M.coeff(i, i);
  }
  if (!(trM > 0)) throw Error(ErrorCode::SingularMass, "mass matrix has zero trace");
  const double shift = trK > 0 ? 1e-4 * trK / trM : 1.0;
  SpMat A = K + shift * M;
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "factorization of the shifted pencil failed");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  MatrixXd X(n, p);
  for (int c = 0; c < p; ++c)
    for (int r = 0; r < n; ++r) X(r, c) = normal(rng);
  if (opts.warm_start && opts.warm_start->rows() == n)
    for (int c = 0; c < std::min<int>(p, static_cast<int>(opts.warm_start->cols())); ++c) X.col(c) = opts.warm_start->col(c);
  deflate(X, M, Z);
  orthonormalize(X, M, Z, rng);

  VectorXd theta;
  for (int it = 1; it <= opts.max_iters; ++it) {
    MatrixXd Y = ldlt.solve(M * X);
    deflate(Y, M, Z);
    orthonormalize(Y, M, Z, rng);
    MatrixXd H = Y.transpose() * (K * Y);
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    theta = es.eigenvalues();
    X = Y * es.eigenvectors();
    bool done = true;
    out.residuals.assign(count, 0.0);
    for (int i = 0; i < count; ++i) {
      out.residuals[i] = rel_residual(K, M, X.col(i), theta[i]);
      if (out.residuals[i] > opts.tol) done = false;
    }
    out.iterations = it;
    if (done) {
      for (int i = 0; i < count; ++i) out.values.push_back(theta[i]);
      out.vectors = X.leftCols(count);
      return out;
    }
  }
  throw Error(ErrorCode::NoConvergence, "eigensolver did not converge in " + std::to_string(opts.max_iters) +
                                            " iterations (worst residual " +
                                            std::to_string(*std::max_element(out.residuals.begin(), out.residuals.end())) +
                                            ")");
}

SpMat submatrix(const SpMat& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rpos(A.rows(), -1), cpos(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rpos[rows[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) cpos[cols[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (rpos[it.row()] >= 0 && cpos[it.col()] >= 0) trip.emplace_back(rpos[it.row()], cpos[it.col()], it.value());
  SpMat S(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

std::vector<PanelLabel> labels_with(const SymmetricMesh& m, const BoundaryConditionMap& bc, BC which) {
  std::vector<PanelLabel> out;
  for (const auto& be : m.boundary)
    if (bc.of(be.label) == which && std::find(out.begin(), out.end(), be.label) == out.end()) out.push_back(be.label);
  return out;
}

}  // namespace

ReducedPencil reduce_problem(const SymmetricMesh& m, const BoundaryConditionMap& bc) {
  const int n = m.num_vertices();
  const auto steklov_panels = labels_with(m, bc, BC::Steklov);
  const bool steklov = bc.has(BC::Steklov);
  if (steklov && (m.boundary.empty() || steklov_panels.empty()))
    throw Error(ErrorCode::NoBoundary, "Steklov problem needs a Steklov boundary panel");
  std::vector<char> dirichlet(n, 0);
  for (const auto& be : m.boundary)
    if (bc.of(be.label) == BC::Dirichlet) dirichlet[be.a] = dirichlet[be.b] = 1;
  std::vector<int> free;
  for (int v = 0; v < n; ++v)
    if (!dirichlet[v]) free.push_back(v);
  if (free.empty()) throw Error(ErrorCode::AllDirichlet, "every vertex carries a Dirichlet condition");
  std::vector<int> pos(n, -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);
  const int nf = static_cast<int>(free.size());

  ReducedPencil p;
  p.kind = steklov ? ProblemKind::Steklov : ProblemKind::Laplace;
  p.normalizer = steklov ? boundary_length(m, steklov_panels) : area(m);
  p.K = submatrix(assemble_stiffness(m), free, free);
  const VectorXd wfull = steklov ? boundary_mass_diagonal(m, steklov_panels) : mass_diagonal(m);
  p.mass.resize(nf);
  for (int i = 0; i < nf; ++i) p.mass[i] = wfull[free[i]];
  if (!steklov)
    for (int i = 0; i < nf; ++i)
      if (!(p.mass[i] > 0)) throw Error(ErrorCode::SingularMass, "vertex with zero mass");
  std::vector<Eigen::Triplet<double>> sel;
  for (int i = 0; i < nf; ++i) sel.emplace_back(free[i], i, 1.0);
  p.expand.resize(n, nf);
  p.expand.setFromTriplets(sel.begin(), sel.end());

  // Kernel: constants on free components that do not touch a Dirichlet vertex.
  std::vector<int> comp(nf, -1);
  std::vector<char> comp_pinned;
  int ncomp = 0;
  std::vector<std::vector<int>> adj(n);
  for (const auto& e : m.edges) {
    adj[e[0]].push_back(e[1]);
    adj[e[1]].push_back(e[0]);
  }
  for (int s = 0; s < nf; ++s) {
    if (comp[s] >= 0) continue;
    comp_pinned.push_back(0);
    std::vector<int> stack{s};
    comp[s] = ncomp;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int wv : adj[free[i]]) {
        if (dirichlet[wv]) {
          comp_pinned[ncomp] = 1;
          continue;
        }
        if (comp[pos[wv]] < 0) {
          comp[pos[wv]] = ncomp;
          stack.push_back(pos[wv]);
        }
      }
    }
    ++ncomp;
  }
  std::vector<int> kernel_comps;
  for (int c = 0; c < ncomp; ++c)
    if (!comp_pinned[c]) kernel_comps.push_back(c);
  p.kernel = MatrixXd::Zero(nf, static_cast<int>(kernel_comps.size()));
  for (std::size_t q = 0; q < kernel_comps.size(); ++q) {
    double norm2 = 0;
    for (int i = 0; i < nf; ++i)
      if (comp[i] == kernel_comps[q]) {
        p.kernel(i, q) = 1.0;
        norm2 += p.mass[i];
      }
    if (!(norm2 > 0)) throw Error(ErrorCode::NoBoundary, "a component carries no Steklov boundary");
    p.kernel.col(q) /= std::sqrt(norm2);
  }
  return p;
}

Spectrum solve_reduced(const ReducedPencil& p, int count, const SolverOptions& opts) {
  if (count < 1) throw Error(ErrorCode::BadIndex, "count must be at least 1");
  const SpMat& K = p.K;
  const VectorXd& w = p.mass;
  const MatrixXd& Z = p.kernel;
  const int nf = static_cast<int>(K.rows());
  const int kz = static_cast<int>(Z.cols());
  const bool steklov = p.kind == ProblemKind::Steklov;
  const SpMat M = diagonal_matrix(w);

  Spectrum sp;
  sp.kind = p.kind;
  sp.zero_modes = kz;
  sp.normalizer = p.normalizer;

  Eigenpairs ep;
  std::vector<int> S, I;
  if (steklov)
    for (int i = 0; i < nf; ++i) (w[i] > 0 ? S : I).push_back(i);
  if (!steklov && nf <= opts.dense_threshold) {
    ep = dense_pairs(K, M, kz + count);
    const int drop = std::min<int>(kz, static_cast<int>(ep.values.size()));
    ep.values.erase(ep.values.begin(), ep.values.begin() + drop);
    ep.residuals.erase(ep.residuals.begin(), ep.residuals.begin() + drop);
    ep.vectors = ep.vectors.rightCols(ep.vectors.cols() - drop);
  } else if (steklov && static_cast<int>(S.size()) <= opts.schur_threshold) {
    // Dense Dirichlet-to-Neumann matrix on the Steklov unknowns.
    const SpMat Kss = submatrix(K, S, S), Ksi = submatrix(K, S, I), Kii = submatrix(K, I, I);
    MatrixXd D = MatrixXd(Kss);
    MatrixXd X;
    if (!I.empty()) {
      Eigen::SimplicialLDLT<SpMat> ldlt(Kii);
      if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "interior stiffness is singular");
      X = ldlt.solve(MatrixXd(Ksi.transpose()));
      D -= Ksi * X;
    }
    VectorXd ws(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) ws[i] = w[S[i]];
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(0.5 * (D + D.transpose()), MatrixXd(ws.asDiagonal()));
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "dense Steklov solve failed");
    const int take = std::min<int>(kz + count, static_cast<int>(S.size()));
    ep.vectors.resize(nf, std::max(0, take - kz));
    for (int c = kz; c < take; ++c) {
      VectorXd u = VectorXd::Zero(nf);
      const VectorXd us = es.eigenvectors().col(c);
      for (std::size_t i = 0; i < S.size(); ++i) u[S[i]] = us[i];
      if (!I.empty()) {
        const VectorXd ui = -X * us;
        for (std::size_t i = 0; i < I.size(); ++i) u[I[i]] = ui[i];
      }
      ep.values.push_back(es.eigenvalues()[c]);
      ep.vectors.col(c - kz) = u;
      ep.residuals.push_back(rel_residual(K, M, u, es.eigenvalues()[c]));
    }
  } else {
    const int avail = (steklov ? static_cast<int>(S.size()) : nf) - kz;
    if (avail > 0) ep = subspace_iteration(K, M, std::min(count, avail), Z, opts);
  }

  sp.eigenvalues.assign(kz, 0.0);
  sp.residuals.assign(kz, 0.0);
  sp.eigenvalues.insert(sp.eigenvalues.end(), ep.values.begin(), ep.values.end());
  sp.residuals.insert(sp.residuals.end(), ep.residuals.begin(), ep.residuals.end());
  sp.iterations = ep.iterations;
  MatrixXd V(nf, sp.size());
  if (kz > 0) V.leftCols(kz) = Z;
  if (!ep.values.empty()) V.rightCols(ep.values.size()) = ep.vectors;
  sp.eigenvectors = p.expand.rows() > 0 ? MatrixXd(p.expand * V) : V;
  return sp;
}

namespace {
Spectrum solve_problem(const SymmetricMesh& m, const BoundaryConditionMap& bc, int count, const SolverOptions& opts) {
  if (count < 1) throw Error(ErrorCode::BadIndex, "count must be at least 1");
  return solve_reduced(reduce_problem(m, bc), count, opts);
}
}  // namespace

Spectrum solve_generalized(const SpMat& K, const SpMat& M, int count, const SolverOptions& opts) {
  if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
    throw Error(ErrorCode::DimensionMismatch, "pencil matrices must be square and of equal size");
  if (count < 1) throw Error(ErrorCode::BadIndex, "count must be at least 1");
  const int n = static_cast<int>(K.rows());
  count = std::min(count, n);
  bool mass_pd = true;
  for (int i = 0; i < n; ++i)
    if (!(M.coeff(i, i) > 0)) mass_pd = false;
  Eigenpairs ep = (n <= opts.dense_threshold && mass_pd) ? dense_pairs(K, M, count)
                                                           : subspace_iteration(K, M, count, MatrixXd(n, 0), opts);
  Spectrum sp;
  sp.eigenvalues = ep.values;
  sp.eigenvectors = ep.vectors;
  sp.residuals = ep.residuals;
  sp.iterations = ep.iterations;
  return sp;
}

Spectrum laplace_spectrum(const SymmetricMesh& m, int count, const SolverOptions& opts, const BoundaryConditionMap& bc) {
  if (bc.has(BC::Steklov)) throw Error(ErrorCode::InvalidType, "Laplace problem with a Steklov panel");
  return solve_problem(m, bc, count, opts);
}

Spectrum steklov_spectrum(const SymmetricMesh& m, int count, const SolverOptions& opts) {
  return solve_problem(m, BoundaryConditionMap::for_kind(ProblemKind::Steklov), count, opts);
}

Spectrum mixed_spectrum(const SymmetricMesh& m, const BoundaryConditionMap& bc, int count, const SolverOptions& opts) {
  return solve_problem(m, bc, count, opts);
}

double normalized_first(const SymmetricMesh& m, ProblemKind kind, const SolverOptions& opts) {
  const Spectrum sp = kind == ProblemKind::Laplace ? laplace_spectrum(m, 1, opts) : steklov_spectrum(m, 1, opts);
  return sp.normalized_first();
}

double dirichlet_energy(const SymmetricMesh& m, const VectorXd& u) {
  if (u.size() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "field size differs from vertex count");
  return u.dot(assemble_stiffness(m) * u);
}

HarmonicExtension harmonic_extension(const SymmetricMesh& m, const std::vector<int>& vertices, const VectorXd& values) {
  const int n = m.num_vertices();
  if (static_cast<int>(vertices.size()) != values.size())
    throw Error(ErrorCode::DimensionMismatch, "one value per marked vertex");
  std::vector<char> fixed(n, 0);
  VectorXd u = VectorXd::Zero(n);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (vertices[i] < 0 || vertices[i] >= n) throw Error(ErrorCode::BadIndex, "marked vertex out of range");
    fixed[vertices[i]] = 1;
    u[vertices[i]] = values[static_cast<int>(i)];
  }
  std::vector<int> F, B;
  for (int v = 0; v < n; ++v) (fixed[v] ? B : F).push_back(v);
  const SpMat K = assemble_stiffness(m);
  if (!F.empty()) {
    const SpMat Kff = submatrix(K, F, F), Kfb = submatrix(K, F, B);
    VectorXd ub(B.size());
    for (std::size_t i = 0; i < B.size(); ++i) ub[i] = u[B[i]];
    Eigen::SimplicialLDLT<SpMat> ldlt(Kff);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "extension system is singular");
    const VectorXd uf = ldlt.solve(-(Kfb * ub));
    for (std::size_t i = 0; i < F.size(); ++i) u[F[i]] = uf[i];
  }
  HarmonicExtension h;
  h.u = u;
  h.energy = u.dot(K * u);
  return h;
}

}  // namespace eigenmax
