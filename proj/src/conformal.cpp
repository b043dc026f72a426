#include "eigenmax/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

#include "eigenmax/equivariant.hpp"
#include "eigenmax/error.hpp"

namespace eigenmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;
const std::vector<PanelLabel> kOuter{PanelLabel{}};

// Reference lumped area per vertex (density 1).
VectorXd reference_area(const SymmetricMesh& m) {
  VectorXd a = VectorXd::Zero(m.num_vertices());
  for (int t = 0; t < m.num_triangles(); ++t)
    for (int v : m.triangles[t]) a[v] += m.triangle_area(t) / 3.0;
  return a;
}

// Reference half edge length per boundary vertex on the Steklov panels.
VectorXd reference_boundary(const SymmetricMesh& m) {
  VectorXd l = VectorXd::Zero(m.num_vertices());
  for (const auto& be : m.boundary) {
    if (!(be.label == PanelLabel{})) continue;
    const double h = 0.5 * m.edge_length[m.edge_index(be.a, be.b)];
    l[be.a] += h;
    l[be.b] += h;
  }
  return l;
}

VectorXd quadrature(const SymmetricMesh& m, ProblemKind kind) {
  return kind == ProblemKind::Laplace ? mass_diagonal(m) : boundary_mass_diagonal(m, kOuter);
}

// Euclidean projection of a symmetric matrix onto {W >= 0, tr W = 1}.
MatrixXd project_spectraplex(const MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()));
  VectorXd d = es.eigenvalues();
  const int k = static_cast<int>(d.size());
  std::vector<double> s(d.data(), d.data() + k);
  std::sort(s.rbegin(), s.rend());
  double cum = 0, theta = 0;
  for (int i = 0; i < k; ++i) {
    cum += s[i];
    const double t = (cum - 1.0) / (i + 1);
    if (s[i] - t > 0) theta = t;
  }
  d = (d.array() - theta).cwiseMax(0.0);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

Spectrum solve(const SymmetricMesh& m, ProblemKind kind, int count, const SolverOptions& opts) {
  return kind == ProblemKind::Laplace ? laplace_spectrum(m, count, opts) : steklov_spectrum(m, count, opts);
}
}  // namespace

double eigenvalue_derivative(const SymmetricMesh& m, const Spectrum& sp, const VectorXd& delta, int member) {
  if (delta.size() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "direction size differs from vertex count");
  int idx = member;
  if (idx < 0) {
    const auto c = sp.first_cluster();
    if (c.empty()) throw Error(ErrorCode::EmptyCluster, "no nonzero eigenvalue in the spectrum");
    if (c.size() > 1 || c.back() + 1 >= sp.size())
      throw Error(ErrorCode::ClusterAmbiguous, "first eigenvalue is not simple; choose a cluster member");
    idx = c.front();
  }
  if (idx < sp.zero_modes || idx >= sp.size()) throw Error(ErrorCode::BadIndex, "member is not a nonzero eigenpair");
  const double lam = sp.eigenvalues[idx];
  const VectorXd u = sp.eigenvectors.col(idx);
  VectorXd rho(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) rho[v] = m.density[v];
  if (sp.kind == ProblemKind::Laplace) {
    const VectorXd a = reference_area(m);
    const double norm = (a.array() * rho.array() * u.array().square()).sum();
    const double dlam = -lam * (a.array() * u.array().square() * delta.array()).sum() / norm;
    return a.dot(rho) * dlam + lam * a.dot(delta);
  }
  const VectorXd l = reference_boundary(m);
  const VectorXd s = rho.cwiseSqrt();
  const double norm = (l.array() * s.array() * u.array().square()).sum();
  const VectorXd ds = 0.5 * delta.array() / s.array();
  const double dsig = -lam * (l.array() * u.array().square() * ds.array()).sum() / norm;
  return l.dot(s) * dsig + lam * l.dot(ds);
}

VectorXd flattening_weights(const MatrixXd& F, const VectorXd& q) {
  const int k = static_cast<int>(F.cols());
  if (k == 0) return VectorXd();
  // Gram matrix of [f_1 .. f_k, -1] in the q inner product.
  MatrixXd A(F.rows(), k + 1);
  A.leftCols(k) = F;
  A.col(k).setConstant(-1.0);
  const MatrixXd G = A.transpose() * q.asDiagonal() * A;
  VectorXd best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << k); ++mask) {
    std::vector<int> S;
    for (int i = 0; i < k; ++i)
      if ((mask >> i) & 1) S.push_back(i);
    S.push_back(k);  // the constant is always free
    const int s = static_cast<int>(S.size());
    MatrixXd kkt = MatrixXd::Zero(s + 1, s + 1);
    VectorXd rhs = VectorXd::Zero(s + 1);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) kkt(i, j) = G(S[i], S[j]);
    for (int i = 0; i + 1 < s; ++i) kkt(i, s) = kkt(s, i) = 1.0;
    rhs[s] = k;
    const VectorXd x = kkt.completeOrthogonalDecomposition().solve(rhs);
    bool feasible = true;
    VectorXd z = VectorXd::Zero(k + 1);
    for (int i = 0; i < s; ++i) {
      z[S[i]] = x[i];
      if (i + 1 < s && x[i] < -1e-12) feasible = false;
    }
    if (!feasible || std::abs(z.head(k).sum() - k) > 1e-8 * k) continue;
    const double res = z.dot(G * z);
    if (res < best_res) {
      best_res = res;
      best = z.head(k).cwiseMax(0.0);
    }
  }
  if (best.size() == 0) best = VectorXd::Ones(k);
  return best * (k / best.sum());
}

ClusterFlattening flatten_cluster(const SymmetricMesh& m, ProblemKind kind, const MatrixXd& U) {
  const VectorXd q = quadrature(m, kind);
  const int k = static_cast<int>(U.cols());
  ClusterFlattening out;
  if (k == 0) return out;
  std::vector<int> support;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (q[v] > 0) support.push_back(v);
  const int ns = static_cast<int>(support.size());
  VectorXd qs(ns);
  for (int r = 0; r < ns; ++r) qs[r] = q[support[r]];
  const double total = qs.sum();
  // Centered products u_i u_j (i <= j); off-diagonal entries count twice.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) pairs.emplace_back(i, j);
  const int P = static_cast<int>(pairs.size());
  MatrixXd h(ns, P);
  for (int c = 0; c < P; ++c) {
    const auto [i, j] = pairs[c];
    for (int r = 0; r < ns; ++r) h(r, c) = (i == j ? 1.0 : 2.0) * U(support[r], i) * U(support[r], j);
    h.col(c).array() -= qs.dot(h.col(c)) / total;
  }
  const MatrixXd R = h.transpose() * qs.asDiagonal() * h;
  auto vec = [&](const MatrixXd& W) {
    VectorXd x(P);
    for (int c = 0; c < P; ++c) x[c] = W(pairs[c].first, pairs[c].second);
    return x;
  };
  auto f = [&](const MatrixXd& W) {
    const VectorXd x = vec(W);
    return x.dot(R * x);
  };
  // Minimize over {W >= 0, tr W = k}, starting from the identity.
  MatrixXd W = MatrixXd::Identity(k, k);
  double cur = f(W), step = 1.0 / std::max(R.diagonal().maxCoeff(), 1e-300);
  for (int it = 0; it < 3000 && step > 1e-14 / std::max(R.diagonal().maxCoeff(), 1e-300); ++it) {
    const VectorXd gx = 2.0 * R * vec(W);
    MatrixXd grad = MatrixXd::Zero(k, k);
    for (int c = 0; c < P; ++c) {
      const auto [i, j] = pairs[c];
      if (i == j) {
        grad(i, i) += gx[c];
      } else {
        grad(i, j) += 0.5 * gx[c];
        grad(j, i) += 0.5 * gx[c];
      }
    }
    const MatrixXd trial = k * project_spectraplex((W - step * grad) / k);
    const double val = f(trial);
    if (val < cur) {
      W = trial;
      cur = val;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (W + W.transpose()));
  out.basis = U * es.eigenvectors();
  out.weights = es.eigenvalues().cwiseMax(0.0);
  out.residual = extremality_residual(m, kind, out.basis, out.weights);
  return out;
}

double extremality_residual(const SymmetricMesh& m, ProblemKind kind, const MatrixXd& basis, const VectorXd& weights) {
  const VectorXd q = quadrature(m, kind);
  VectorXd f = VectorXd::Zero(m.num_vertices());
  for (int i = 0; i < basis.cols(); ++i) f += weights[i] * basis.col(i).cwiseAbs2();
  double mean = 0, total = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (q[v] > 0) {
      mean += q[v] * f[v];
      total += q[v];
    }
  mean /= total;
  double worst = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (q[v] > 0) worst = std::max(worst, std::abs(f[v] - mean));
  return worst / mean;
}

double brs_guard(const SymmetricMesh& m) {
  if (!m.descriptor.is_object() || !m.descriptor.contains("family")) return 0.0;
  try {
    const auto d = descriptor_from_json(m.descriptor);
    return d.closed_family() ? 16 * kPi : 4 * kPi;
  } catch (const Error&) {
    return 0.0;
  }
}

nlohmann::json OptimizationState::to_json() const {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& h : history)
    hist.push_back({{"iter", h.iter}, {"objective", h.objective}, {"residual", h.residual}, {"cluster", h.cluster},
                    {"step", h.step}});
  return {{"kind", kind == ProblemKind::Laplace ? "laplace" : "steklov"},
          {"objective", objective},
          {"residual", residual},
          {"cluster_dimension", cluster_basis.cols()},
          {"cluster_values", cluster_values},
          {"weights", std::vector<double>(weights.data(), weights.data() + weights.size())},
          {"converged", converged},
          {"stalled", stalled},
          {"floor_hits", floor_hits},
          {"iterations", hist}};
}

namespace {

struct Evaluation {
  Spectrum sp;
  std::vector<int> cluster;  // first cluster at the reporting tolerance
  std::vector<int> active;   // eigenvalues within the ascent window of the minimum
  double objective = 0.0;
};

Evaluation evaluate(const SymmetricMesh& m, ProblemKind kind, int count, const OptimizerOptions& opts,
                    const MatrixXd* warm) {
  SolverOptions so = opts.solver;
  so.warm_start = warm;
  for (;;) {
    Evaluation e;
    e.sp = solve(m, kind, count, so);
    e.sp.cluster_tolerance = opts.cluster_tolerance;
    e.cluster = e.sp.first_cluster();
    if (e.cluster.empty()) throw Error(ErrorCode::EmptyCluster, "no nonzero eigenvalue");
    e.objective = e.sp.normalized_first();
    const double lo = e.sp.first_nonzero();
    for (int i = e.sp.zero_modes; i < e.sp.size(); ++i)
      if (e.sp.eigenvalues[i] <= lo * (1 + opts.window)) e.active.push_back(i);
    const int last = std::max(e.cluster.back(), e.active.back());
    // The window must be followed by a computed eigenvalue outside it.
    if (last + 1 < e.sp.size() || e.sp.size() - e.sp.zero_modes < count || count >= m.num_vertices()) return e;
    count *= 2;
  }
}

// Ascent direction for the smallest eigenvalue of the linearized cluster model
//   diag(ell) + D(eta),  D_ij(eta) = <eta, h_ij>_q,  h_ij = lam_ij (delta_ij - N u_i u_j),
// with q a probability weight and lam, ell normalized eigenvalues,
// from the dual min over the spectraplex of <W, diag ell> + radius |sum W_ij h_ij|_q.
VectorXd ascent_direction(const VectorXd& ell, const std::vector<double>& lam, const MatrixXd& U, const VectorXd& q,
                          double N, double radius) {
  const int k = static_cast<int>(ell.size());
  const int n = static_cast<int>(U.rows());
  const int P = k * (k + 1) / 2;
  MatrixXd h(n, P);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) {
      const double l = 0.5 * (lam[i] + lam[j]);
      const int c = static_cast<int>(pairs.size());
      for (int v = 0; v < n; ++v) h(v, c) = q[v] > 0 ? l * ((i == j ? 1.0 : 0.0) - N * U(v, i) * U(v, j)) : 0.0;
      pairs.emplace_back(i, j);
    }
  const MatrixXd Q = h.transpose() * q.asDiagonal() * h;
  auto coords = [&](const MatrixXd& W) {
    VectorXd x(P);
    for (int c = 0; c < P; ++c) x[c] = (pairs[c].first == pairs[c].second ? 1.0 : 2.0) * W(pairs[c].first, pairs[c].second);
    return x;
  };
  auto phi = [&](const MatrixXd& W) {
    const VectorXd x = coords(W);
    return ell.dot(W.diagonal()) + radius * std::sqrt(std::max(x.dot(Q * x), 0.0));
  };
  const double scale = std::max(ell.cwiseAbs().maxCoeff(), 1e-300);
  MatrixXd W = MatrixXd::Identity(k, k) / k;
  double cur = phi(W), step = 1.0;
  for (int it = 0; it < 2000 && step > 1e-12; ++it) {
    const VectorXd x = coords(W);
    const double nrm = std::sqrt(std::max(x.dot(Q * x), 1e-300));
    const VectorXd gx = Q * x * (radius / nrm);
    MatrixXd grad = ell.asDiagonal();
    for (int c = 0; c < P; ++c) {
      const auto [i, j] = pairs[c];
      if (i == j) {
        grad(i, i) += gx[c];
      } else {
        grad(i, j) += gx[c];
        grad(j, i) += gx[c];
      }
    }
    const MatrixXd trial = project_spectraplex(W - (step / scale) * grad);
    const double val = phi(trial);
    if (val < cur) {
      W = trial;
      cur = val;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return h * coords(W);
}

}  // namespace

OptimizationState maximize(const SymmetricMesh& mesh, ProblemKind kind, const OptimizerOptions& opts) {
  SymmetricMesh m = mesh;
  const int n = m.num_vertices();
  VectorXd rho(n);
  for (int v = 0; v < n; ++v) rho[v] = m.density[v];
  const VectorXd lref = reference_boundary(m);
  if (kind == ProblemKind::Steklov) {
    if (lref.sum() <= 0) throw Error(ErrorCode::NoBoundary, "Steklov optimization needs an outer boundary");
    for (int v = 0; v < n; ++v)
      if (lref[v] <= 0) rho[v] = 1.0;  // interior density does not enter the Steklov problem
  }
  rho = average_invariant(m, rho);
  m.density.assign(rho.data(), rho.data() + n);

  auto guard = [&](double value) {
    if (opts.guard > 0 && !(value < opts.guard))
      throw Error(ErrorCode::BoundViolation, "normalized eigenvalue " + std::to_string(value) +
                                                 " reaches the bound " + std::to_string(opts.guard) +
                                                 "; the action table is inconsistent");
  };

  OptimizationState st;
  st.kind = kind;
  int count = 6;
  Evaluation cur = evaluate(m, kind, count, opts, nullptr);
  guard(cur.objective);
  MatrixXd warm = cur.sp.eigenvectors;
  double radius = opts.initial_radius;

  for (int it = 0;; ++it) {
    const VectorXd qraw = quadrature(m, kind);
    const VectorXd q = qraw / qraw.sum();  // probability weights keep the trust radius scale free
    const double N = cur.sp.normalizer;

    // Reporting state: flattest combination of the first cluster.
    const auto& C = cur.cluster;
    const int k = static_cast<int>(C.size());
    MatrixXd U(n, k);
    for (int i = 0; i < k; ++i) U.col(i) = cur.sp.eigenvectors.col(C[i]);
    const ClusterFlattening flat = flatten_cluster(m, kind, U);
    st.weights = flat.weights;
    st.objective = cur.objective;
    st.residual = flat.residual;
    st.cluster_basis = flat.basis;
    st.cluster_values.clear();
    for (int i : C) st.cluster_values.push_back(cur.sp.eigenvalues[i]);
    IterationRecord rec{it, cur.objective, st.residual, k, 0.0};

    if (st.residual < opts.tol) {
      st.converged = true;
      st.history.push_back(rec);
      break;
    }
    if (it >= opts.max_iters) {
      st.history.push_back(rec);
      st.stalled = true;
      break;
    }

    // Linearized model of the active eigenvalues in log-density coordinates.
    const int ka = static_cast<int>(cur.active.size());
    MatrixXd Ua(n, ka);
    VectorXd ell(ka);
    std::vector<double> lam(ka);
    for (int i = 0; i < ka; ++i) {
      ell[i] = cur.sp.eigenvalues[cur.active[i]] * N;
      lam[i] = ell[i];  // with probability weights the model is in normalized units
      Ua.col(i) = cur.sp.eigenvectors.col(cur.active[i]);
    }

    bool accepted = false;
    for (int level = 0; level <= opts.line_search_levels; ++level) {
      VectorXd d = average_invariant(m, ascent_direction(ell, lam, Ua, q, N, radius));
      const double dn = std::sqrt(d.dot(q.asDiagonal() * d));
      if (!(dn > 0)) break;
      const VectorXd eta = (radius / dn) * d;
      VectorXd trial = rho;
      for (int v = 0; v < n; ++v)
        if (q[v] > 0) trial[v] = rho[v] * std::exp((kind == ProblemKind::Laplace ? 1.0 : 2.0) * eta[v]);
      trial = average_invariant(m, trial);
      trial = trial.cwiseMax(opts.floor * trial.mean());
      SymmetricMesh probe = m;
      probe.density.assign(trial.data(), trial.data() + n);
      Evaluation e;
      bool ok = true;
      try {
        e = evaluate(probe, kind, std::max(count, ka + 4), opts, &warm);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NoConvergence) throw;
        ok = false;
      }
      if (ok) guard(e.objective);
      if (ok && e.objective > cur.objective + 1e-12 * std::abs(cur.objective)) {
        rec.step = radius;
        rho = trial;
        m = std::move(probe);
        cur = std::move(e);
        warm = cur.sp.eigenvectors;
        count = std::max(6, static_cast<int>(std::max(cur.cluster.size(), cur.active.size())) + 4);
        radius = std::min(2.0 * radius, opts.max_radius);
        accepted = true;
        break;
      }
      radius *= 0.5;
    }
    st.history.push_back(rec);
    if (!accepted) {
      st.stalled = true;
      radius = opts.initial_radius;
      break;
    }
  }
  st.density = m.density;
  st.floor_hits = static_cast<int>((rho.array() <= opts.floor * rho.mean() * (1 + 1e-12)).count());
  return st;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto j = states[i].to_json();
    j["param"] = params[i];
    j.erase("iterations");
    runs.push_back(j);
  }
  return {{"runs", runs}, {"best", best}, {"best_param", params.at(best)}, {"best_value", states.at(best).objective}};
}

SweepResult moduli_sweep(const std::vector<double>& params, const std::function<SymmetricMesh(double)>& family,
                         ProblemKind kind, const OptimizerOptions& opts) {
  if (params.empty()) throw Error(ErrorCode::BadIndex, "empty parameter grid");
  SweepResult out;
  out.params = params;
  for (double p : params) out.states.push_back(maximize(family(p), kind, opts));
  for (std::size_t i = 1; i < params.size(); ++i)
    if (out.states[i].objective > out.states[out.best].objective) out.best = static_cast<int>(i);
  return out;
}

CurveFlags invariant_curve_flags(const SurfaceDescriptor& d) {
  const ReflectionGroup G = d.effective_group();
  const TypeB b = d.effective_type();
  CurveFlags f;
  switch (G.kind) {
    case GroupKind::Trivial: f.two_sided = b.f > 0; break;
    case GroupKind::OneStar: f.two_sided = b.ei(1) > 0; break;
    case GroupKind::DihedralStar: f.two_sided = b.vij(1, 2) > 0; break;
    case GroupKind::Platonic: f.two_sided = false; break;
  }
  return f;
}

std::vector<double> GapReport::thresholds() const {
  std::vector<double> t;
  if (kind == ProblemKind::Laplace) {
    if (flags.two_sided) t.push_back(8 * kPi);
    if (flags.one_sided) t.push_back(12 * kPi);
  } else if (flags.two_sided) {
    t.push_back(2 * kPi);
  }
  return t;
}

double GapReport::comparison() const {
  double c = 0;
  for (double t : thresholds()) c = std::max(c, t);
  for (const auto& ch : children) c = std::max(c, ch.value);
  return c;
}

std::string GapReport::verdict() const {
  const double c = comparison();
  if (c <= 0) return "inconclusive";
  if (value > c * (1 + margin)) return "strict";
  if (value >= c * (1 - margin)) return "equality";
  return "violated";
}

nlohmann::json GapReport::to_json() const {
  nlohmann::json ch = nlohmann::json::array();
  for (const auto& c : children) ch.push_back({{"descriptor", c.descriptor}, {"value", c.value}, {"vertices", c.vertices}});
  return {{"parent", parent},
          {"kind", kind == ProblemKind::Laplace ? "laplace" : "steklov"},
          {"value", value},
          {"vertices", vertices},
          {"delta_two_sided", flags.two_sided},
          {"delta_one_sided", flags.one_sided},
          {"thresholds", thresholds()},
          {"children", ch},
          {"comparison", comparison()},
          {"margin", margin},
          {"verdict", verdict()},
          {"lawson_reference", 4 * kPi * kPi},
          {"exceeds_lawson_reference", kind == ProblemKind::Laplace && value > 4 * kPi * kPi},
          {"warnings", warnings}};
}

GapReport gap_report(const SurfaceDescriptor& parent, double value, int vertices, const std::vector<GapChild>& children,
                     double margin) {
  GapReport r;
  r.parent = parent.key();
  r.kind = parent.closed_family() ? ProblemKind::Laplace : ProblemKind::Steklov;
  r.value = value;
  r.vertices = vertices;
  r.flags = invariant_curve_flags(parent);
  r.children = children;
  r.margin = margin;
  for (const auto& c : children)
    if (vertices > 0 && c.vertices > 0 && (c.vertices > 2 * vertices || 2 * c.vertices < vertices))
      r.warnings.push_back("ResolutionMismatch: " + c.descriptor + " has " + std::to_string(c.vertices) +
                           " vertices against " + std::to_string(vertices));
  return r;
}

}  // namespace eigenmax
