#include "eigenmax/gl.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "eigenmax/error.hpp"

namespace eigenmax {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Penalty scale: eps^2 for closed targets, eps for free-boundary ones.
double penalty_scale(const GLState& s) { return s.target == GLTarget::Closed ? s.eps * s.eps : s.eps; }

double dirichlet_part(const SpMat& K, const MatrixXd& u) {
  double e = 0;
  for (int c = 0; c < u.cols(); ++c) e += 0.5 * u.col(c).dot(K * u.col(c));
  return e;
}

double penalty_part(const VectorXd& w, const MatrixXd& u, double scale) {
  double e = 0;
  for (int v = 0; v < u.rows(); ++v) {
    if (w[v] == 0) continue;
    const double d = 1.0 - u.row(v).squaredNorm();
    e += w[v] * d * d;
  }
  return e / (4.0 * scale);
}

MatrixXd gradient_of(const SpMat& K, const VectorXd& w, const MatrixXd& u, double scale) {
  MatrixXd g = K * u;
  for (int v = 0; v < u.rows(); ++v) {
    if (w[v] == 0) continue;
    g.row(v) -= (w[v] * (1.0 - u.row(v).squaredNorm()) / scale) * u.row(v);
  }
  return g;
}

VectorXd residual_weights(const SymmetricMesh& m, GLTarget target) {
  VectorXd W = mass_diagonal(m);
  if (target == GLTarget::FreeBoundary) W += gl_weights(m, target);
  return W;
}

double residual_of(const MatrixXd& g, const VectorXd& W) {
  double r = 0;
  for (int v = 0; v < g.rows(); ++v) r += g.row(v).squaredNorm() / W[v];
  return std::sqrt(r);
}

// Unknowns ordered vertex-major: index v * d + c.
SpMat kron_identity(const SpMat& K, int d) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<size_t>(K.nonZeros()) * d);
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      for (int c = 0; c < d; ++c) t.emplace_back(it.row() * d + c, it.col() * d + c, it.value());
  SpMat out(K.rows() * d, K.cols() * d);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

VectorXd flatten(const MatrixXd& u) {
  VectorXd x(u.size());
  for (int v = 0; v < u.rows(); ++v)
    for (int c = 0; c < u.cols(); ++c) x[v * u.cols() + c] = u(v, c);
  return x;
}

MatrixXd unflatten(const VectorXd& x, int rows, int cols) {
  MatrixXd u(rows, cols);
  for (int v = 0; v < rows; ++v)
    for (int c = 0; c < cols; ++c) u(v, c) = x[v * cols + c];
  return u;
}

SpMat hessian(const SpMat& Kd, const VectorXd& w, const MatrixXd& u, double scale) {
  const int d = static_cast<int>(u.cols());
  std::vector<Eigen::Triplet<double>> t;
  for (int v = 0; v < u.rows(); ++v) {
    if (w[v] == 0) continue;
    const double s = u.row(v).squaredNorm();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double h = 2.0 * u(v, a) * u(v, b);
        if (a == b) h -= 1.0 - s;
        t.emplace_back(v * d + a, v * d + b, w[v] * h / scale);
      }
  }
  SpMat D(Kd.rows(), Kd.cols());
  D.setFromTriplets(t.begin(), t.end());
  return Kd + D;
}

MatrixXd apply_g(const SymmetricMesh& m, int g, const MatrixXd& u) {
  MatrixXd out(u.rows(), u.cols());
  const auto& p = m.action.perms[g];
  for (int v = 0; v < u.rows(); ++v) out.row(v) = u.row(p[v]);
  return out;
}

double snap(double x) {
  for (double t : {-1.0, 0.0, 1.0})
    if (std::abs(x - t) < 1e-6) return t;
  return x;
}

int worker_count(int tasks) {
  return std::max(1, std::min(tasks, max_jobs()));
}

VectorXd weighted_average(const VectorXd& w, const MatrixXd& u) { return (u.transpose() * w) / w.sum(); }

}  // namespace

Representation trivial_representation(const SymmetricMesh& m, int dim) {
  Representation r;
  r.mats.assign(m.action.size(), MatrixXd::Identity(dim, dim));
  return r;
}

Representation fitted_representation(const SymmetricMesh& m, const MatrixXd& u, const VectorXd& weights) {
  if (u.rows() != m.num_vertices() || weights.size() != u.rows())
    throw Error(ErrorCode::DimensionMismatch, "map and weights must have one row per vertex");
  const MatrixXd G = u.transpose() * weights.asDiagonal() * u;
  Eigen::LDLT<MatrixXd> Gi(G);
  Representation r;
  for (int g = 0; g < m.action.size(); ++g) {
    const MatrixXd C = apply_g(m, g, u).transpose() * weights.asDiagonal() * u;
    const MatrixXd R = Gi.solve(C.transpose()).transpose();
    Eigen::JacobiSVD<MatrixXd> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixXd Q = svd.matrixU() * svd.matrixV().transpose();
    const MatrixXd S = Q.unaryExpr([](double x) { return snap(x); });
    bool exact = true;
    for (int i = 0; i < S.size() && exact; ++i) exact = (S.data()[i] == -1.0 || S.data()[i] == 0.0 || S.data()[i] == 1.0);
    if (exact && (S.transpose() * S - MatrixXd::Identity(S.rows(), S.cols())).norm() == 0.0) Q = S;
    r.mats.push_back(Q);
  }
  return r;
}

MatrixXd fixed_subspace(const Representation& rep) {
  if (rep.empty()) return MatrixXd();
  const int d = rep.dim();
  MatrixXd P = MatrixXd::Zero(d, d);
  for (const auto& R : rep.mats) P += R;
  P /= static_cast<double>(rep.mats.size());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (P + P.transpose()));
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (es.eigenvalues()[i] > 0.5) keep.push_back(i);
  MatrixXd F(d, static_cast<int>(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) F.col(static_cast<int>(i)) = es.eigenvectors().col(keep[i]);
  return F;
}

MatrixXd average_equivariant(const SymmetricMesh& m, const Representation& rep, const MatrixXd& u) {
  if (rep.empty()) return u;
  if (static_cast<int>(rep.mats.size()) != m.action.size() || rep.dim() != u.cols())
    throw Error(ErrorCode::DimensionMismatch, "representation does not match the action or the target");
  MatrixXd out = MatrixXd::Zero(u.rows(), u.cols());
  for (int g = 0; g < m.action.size(); ++g) out += apply_g(m, g, u) * rep.mats[g];
  return out / static_cast<double>(m.action.size());
}

double equivariance_defect(const SymmetricMesh& m, const Representation& rep, const MatrixXd& u) {
  if (rep.empty()) return 0.0;
  double d = 0;
  for (int g = 0; g < m.action.size(); ++g)
    d = std::max(d, (apply_g(m, g, u) - u * rep.mats[g].transpose()).cwiseAbs().maxCoeff());
  return d;
}

nlohmann::json GLState::to_json() const {
  nlohmann::json j;
  j["eps"] = eps;
  j["target"] = target == GLTarget::Closed ? "closed" : "free-boundary";
  j["u"] = nlohmann::json::array();
  for (int v = 0; v < u.rows(); ++v) {
    std::vector<double> row(u.cols());
    for (int c = 0; c < u.cols(); ++c) row[c] = u(v, c);
    j["u"].push_back(row);
  }
  j["rep"] = nlohmann::json::array();
  for (const auto& R : rep.mats) {
    std::vector<double> flat(R.data(), R.data() + R.size());
    j["rep"].push_back(flat);
  }
  return j;
}

GLState GLState::from_json(const nlohmann::json& j) {
  try {
    GLState s;
    s.eps = j.at("eps").get<double>();
    s.target = j.at("target").get<std::string>() == "closed" ? GLTarget::Closed : GLTarget::FreeBoundary;
    const auto& rows = j.at("u");
    const int n = static_cast<int>(rows.size());
    const int d = n ? static_cast<int>(rows[0].size()) : 0;
    s.u.resize(n, d);
    for (int v = 0; v < n; ++v)
      for (int c = 0; c < d; ++c) s.u(v, c) = rows[v][c].get<double>();
    if (j.contains("rep"))
      for (const auto& r : j["rep"]) {
        const auto flat = r.get<std::vector<double>>();
        s.rep.mats.push_back(Eigen::Map<const MatrixXd>(flat.data(), d, d));
      }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

VectorXd gl_weights(const SymmetricMesh& m, GLTarget target) {
  if (target == GLTarget::Closed) return mass_diagonal(m);
  return boundary_mass_diagonal(m, {PanelLabel{PanelLabel::Outer, 0}});
}

static void check_state(const GLState& s, const SymmetricMesh& m) {
  if (!(s.eps > 0)) throw Error(ErrorCode::InvalidType, "eps must be positive");
  if (s.u.rows() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "map needs one row per vertex");
}

double gl_energy(const GLState& s, const SymmetricMesh& m) {
  GLState c = s;
  c.target = GLTarget::Closed;
  return energy(c, m);
}

double fb_gl_energy(const GLState& s, const SymmetricMesh& m) {
  GLState c = s;
  c.target = GLTarget::FreeBoundary;
  return energy(c, m);
}

double energy(const GLState& s, const SymmetricMesh& m) {
  check_state(s, m);
  return dirichlet_part(assemble_stiffness(m), s.u) + penalty_part(gl_weights(m, s.target), s.u, penalty_scale(s));
}

MatrixXd gl_gradient(const GLState& s, const SymmetricMesh& m) {
  check_state(s, m);
  return gradient_of(assemble_stiffness(m), gl_weights(m, s.target), s.u, penalty_scale(s));
}

double gl_residual(const GLState& s, const SymmetricMesh& m) {
  return residual_of(gl_gradient(s, m), residual_weights(m, s.target));
}

double induced_area(const GLState& s, const SymmetricMesh& m) {
  check_state(s, m);
  const VectorXd w = gl_weights(m, s.target);
  double a = 0;
  for (int v = 0; v < s.u.rows(); ++v) a += w[v] * (1.0 - s.u.row(v).squaredNorm());
  return a / penalty_scale(s);
}

double max_norm(const GLState& s) { return s.u.rows() ? s.u.rowwise().norm().maxCoeff() : 0.0; }

GLDescentResult gl_descent(const GLState& initial, const SymmetricMesh& m, const GLDescentOptions& opts) {
  check_state(initial, m);
  const SpMat K = assemble_stiffness(m);
  const VectorXd w = gl_weights(m, initial.target);
  const VectorXd W = residual_weights(m, initial.target);
  const double scale = penalty_scale(initial);
  const int d = static_cast<int>(initial.u.cols());
  const SpMat Kd = kron_identity(K, d);

  // Preconditioner for gradient steps: stiffness plus the largest penalty curvature on |u| <= 1.
  VectorXd shift = (2.0 / scale) * w;
  const VectorXd area = mass_diagonal(m);
  shift += 1e-8 * (K.diagonal().sum() / area.sum()) * area;
  SpMat P = Kd;
  for (int v = 0; v < m.num_vertices(); ++v)
    for (int c = 0; c < d; ++c) P.coeffRef(v * d + c, v * d + c) += shift[v];
  Eigen::SimplicialLDLT<SpMat> precond(P);
  if (precond.info() != Eigen::Success) throw Error(ErrorCode::SingularMass, "descent preconditioner is singular");

  GLDescentResult res;
  res.state = initial;
  res.state.u = average_equivariant(m, initial.rep, initial.u);
  MatrixXd& u = res.state.u;
  auto E = [&](const MatrixXd& x) { return dirichlet_part(K, x) + penalty_part(w, x, scale); };
  double e = E(u);
  MatrixXd g = average_equivariant(m, initial.rep, gradient_of(K, w, u, scale));
  double r = residual_of(g, W);
  res.history.push_back({0, e, r, false});
  res.max_equivariance_defect = equivariance_defect(m, initial.rep, u);

  Eigen::SimplicialLDLT<SpMat> newton;
  for (int it = 1; it <= opts.max_iters && r > opts.tol; ++it) {
    const VectorXd gx = flatten(g);
    VectorXd px;
    bool use_newton = false;
    newton.compute(hessian(Kd, w, u, scale));
    if (newton.info() == Eigen::Success && newton.vectorD().minCoeff() > 0) {
      px = -newton.solve(gx);
      use_newton = px.allFinite() && px.dot(gx) < 0;
    }
    if (!use_newton) px = -precond.solve(gx);
    const MatrixXd p = average_equivariant(m, initial.rep, unflatten(px, static_cast<int>(u.rows()), d));
    const double slope = flatten(p).dot(gx);

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < opts.line_search_levels; ++k, alpha *= 0.5) {
      const MatrixXd trial = average_equivariant(m, initial.rep, u + alpha * p);
      const double et = E(trial);
      bool ok = et <= e + 1e-4 * alpha * slope;
      MatrixXd gt;
      double rt = 0;
      if (!ok && et <= e + 1e-12 * std::max(1.0, std::abs(e))) {
        // Energy differences at rounding level: accept when the residual improves.
        gt = average_equivariant(m, initial.rep, gradient_of(K, w, trial, scale));
        rt = residual_of(gt, W);
        ok = rt < r;
      }
      if (ok) {
        u = trial;
        e = et;
        g = gt.size() ? gt : average_equivariant(m, initial.rep, gradient_of(K, w, u, scale));
        r = gt.size() ? rt : residual_of(g, W);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (r <= opts.tol) break;
      throw Error(ErrorCode::Stalled, "no descent step found at residual " + std::to_string(r));
    }
    res.history.push_back({it, e, r, use_newton});
    if (opts.check_every > 0 && it % opts.check_every == 0)
      res.max_equivariance_defect = std::max(res.max_equivariance_defect, equivariance_defect(m, initial.rep, u));
  }
  res.max_equivariance_defect = std::max(res.max_equivariance_defect, equivariance_defect(m, initial.rep, u));
  res.converged = r <= opts.tol;
  return res;
}

std::vector<double> halving_schedule(int count) {
  std::vector<double> out;
  double e = 1.0;
  for (int i = 0; i < count; ++i, e *= 0.5) out.push_back(e);
  return out;
}

GLContinuationResult gl_continuation(const GLState& initial, const SymmetricMesh& m, const std::vector<double>& eps,
                                     const GLDescentOptions& opts, double density_tol) {
  GLContinuationResult out;
  GLState s = initial;
  const VectorXd w = gl_weights(m, initial.target);
  VectorXd prev;
  for (double e : eps) {
    s.eps = e;
    out.stages.push_back(gl_descent(s, m, opts));
    s = out.stages.back().state;
    const double scale = penalty_scale(s);
    VectorXd dens(m.num_vertices());
    for (int v = 0; v < dens.size(); ++v) dens[v] = (1.0 - s.u.row(v).squaredNorm()) / scale;
    if (prev.size()) {
      const double base = w.dot(prev.cwiseAbs());
      const double change = w.dot((dens - prev).cwiseAbs()) / std::max(base, 1e-300);
      out.density_change.push_back(change);
      if (change < density_tol) {
        out.stabilized = true;
        break;
      }
    }
    prev = dens;
  }
  return out;
}

MatrixXd sweepout(const MatrixXd& u0, const VectorXd& a) {
  if (a.size() != u0.cols()) throw Error(ErrorCode::DimensionMismatch, "parameter and target dimensions differ");
  const double a2 = a.squaredNorm();
  if (a2 > 1.0 + 1e-12) throw Error(ErrorCode::InvalidType, "sweepout parameter outside the unit ball");
  MatrixXd out(u0.rows(), u0.cols());
  if (a2 >= 1.0 - 1e-15) {
    for (int v = 0; v < u0.rows(); ++v) out.row(v) = a.transpose();
    return out;
  }
  for (int v = 0; v < u0.rows(); ++v) {
    const VectorXd x = u0.row(v).transpose() + a;
    out.row(v) = ((1.0 - a2) / x.squaredNorm() * x + a).transpose();
  }
  return out;
}

std::vector<double> sweepout_energies(const SymmetricMesh& m, const MatrixXd& u0, const MatrixXd& F,
                                      const std::vector<VectorXd>& params, GLTarget target, double eps) {
  const SpMat K = assemble_stiffness(m);
  const VectorXd w = gl_weights(m, target);
  const double scale = target == GLTarget::Closed ? eps * eps : eps;
  std::vector<double> out(params.size());
  const int workers = worker_count(static_cast<int>(params.size()));
  std::vector<std::future<void>> jobs;
  for (int t = 0; t < workers; ++t)
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (size_t i = t; i < params.size(); i += workers) {
        const MatrixXd u = sweepout(u0, F * params[i]);
        out[i] = dirichlet_part(K, u) + penalty_part(w, u, scale);
      }
    }));
  for (auto& j : jobs) j.get();
  return out;
}

BalancedMember balanced_member(const SymmetricMesh& m, const MatrixXd& u0, const Representation& rep, GLTarget target,
                               int grid, double rel_tol) {
  if (u0.rows() != m.num_vertices()) throw Error(ErrorCode::DimensionMismatch, "map needs one row per vertex");
  const int d = static_cast<int>(u0.cols());
  const MatrixXd F = rep.empty() ? MatrixXd::Identity(d, d) : fixed_subspace(rep);
  const VectorXd w = gl_weights(m, target);
  const double total = w.sum();
  const int k = static_cast<int>(F.cols());
  auto avg = [&](const VectorXd& y) { return weighted_average(w, sweepout(u0, F * y)); };

  BalancedMember bm;
  auto finish = [&](const VectorXd& y, int iters, const char* method) {
    bm.a = F * y;
    bm.u = sweepout(u0, bm.a);
    bm.imbalance = (bm.u.transpose() * w).norm();
    bm.iterations = iters;
    bm.method = method;
    if (bm.imbalance > rel_tol * total)
      throw Error(ErrorCode::NoBalancedMember,
                  "imbalance " + std::to_string(bm.imbalance / total) + " of the total weight remains");
    return bm;
  };

  if (k == 0) return finish(VectorXd(), 0, "bisection");
  if (k == 1) {
    double lo = -1.0, hi = 1.0;
    double flo = F.col(0).dot(avg(VectorXd::Constant(1, lo)));
    int it = 0;
    for (; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const VectorXd c = avg(VectorXd::Constant(1, mid));
      if (c.norm() <= 0.1 * rel_tol) return finish(VectorXd::Constant(1, mid), it, "bisection");
      const double fm = F.col(0).dot(c);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-15) break;
    }
    return finish(VectorXd::Constant(1, 0.5 * (lo + hi)), it, "bisection");
  }

  // Grid start inside the ball, then damped Newton with a finite-difference Jacobian.
  VectorXd best = VectorXd::Zero(k);
  double best_norm = avg(best).norm();
  const int n = std::max(2, grid);
  long total_pts = 1;
  for (int i = 0; i < k; ++i) total_pts *= n;
  for (long idx = 0; idx < total_pts; ++idx) {
    VectorXd y(k);
    long t = idx;
    for (int i = 0; i < k; ++i, t /= n) y[i] = -1.0 + (2.0 * (t % n) + 1.0) / n;
    if (y.norm() >= 1.0) continue;
    const double c = avg(y).norm();
    if (c < best_norm) best_norm = c, best = y;
  }
  VectorXd y = best;
  VectorXd c = F.transpose() * avg(y);
  int it = 0;
  for (; it < 100 && avg(y).norm() > 0.1 * rel_tol; ++it) {
    MatrixXd J(k, k);
    const double h = 1e-7;
    for (int i = 0; i < k; ++i) {
      VectorXd yp = y, ym = y;
      yp[i] += h;
      ym[i] -= h;
      J.col(i) = F.transpose() * (avg(yp) - avg(ym)) / (2 * h);
    }
    VectorXd step = -J.colPivHouseholderQr().solve(c);
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const VectorXd yt = y + t * step;
      if (yt.norm() >= 1.0) continue;
      const VectorXd ct = F.transpose() * avg(yt);
      if (ct.norm() < c.norm()) {
        y = yt;
        c = ct;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return finish(y, it, "newton");
}

static HerschReport hersch_core(const GLState& s, const SymmetricMesh& m, const SolverOptions& solver) {
  HerschReport rep;
  rep.target = s.target;
  rep.eps = s.eps;
  const VectorXd w = gl_weights(m, s.target);
  rep.energy = energy(s, m);
  rep.imbalance = (s.u.transpose() * w).norm() / w.sum();
  const ProblemKind kind = s.target == GLTarget::Closed ? ProblemKind::Laplace : ProblemKind::Steklov;
  const Spectrum sp = kind == ProblemKind::Laplace ? laplace_spectrum(m, 1, solver) : steklov_spectrum(m, 1, solver);
  rep.first = sp.first_nonzero();
  rep.normalized_first = sp.normalized_first();
  rep.fitted_c = std::max(0.0, (rep.normalized_first - 2.0 * rep.energy) / (s.eps * rep.normalized_first));
  if (s.target == GLTarget::Closed) {
    rep.lhs = (2.0 + s.eps) * rep.energy;
    rep.rhs = (1.0 - s.eps) * rep.normalized_first;
    rep.slack = (2.0 + s.eps * rep.first) * rep.energy - rep.rhs;
  } else {
    const double L = w.sum();
    rep.lhs = 2.0 * rep.energy;
    rep.rhs = rep.normalized_first;
    rep.slack = rep.lhs - rep.rhs + 2.0 * rep.first * std::sqrt(s.eps * L * rep.energy);
  }
  rep.literal_slack = rep.lhs - rep.rhs;
  return rep;
}

HerschReport hersch_bound_check(const GLState& s, const SymmetricMesh& m, const SolverOptions& solver) {
  check_state(s, m);
  return hersch_core(s, m, solver);
}

SymmetricMesh unit_first_eigenvalue(const SymmetricMesh& m, ProblemKind kind, const SolverOptions& solver) {
  const Spectrum sp = kind == ProblemKind::Laplace ? laplace_spectrum(m, 1, solver) : steklov_spectrum(m, 1, solver);
  // Density c rho scales lambda_1 by 1/c and sigma_1 by 1/sqrt(c).
  const double f = sp.first_nonzero();
  const double c = kind == ProblemKind::Laplace ? f : f * f;
  SymmetricMesh out = m;
  for (auto& r : out.density) r *= c;
  return out;
}

HerschReport hersch_bound_check(const SymmetricMesh& m, const MatrixXd& u0, const Representation& rep, GLTarget target,
                                double eps, const SolverOptions& solver) {
  const BalancedMember bm = balanced_member(m, u0, rep, target);
  GLState s;
  s.u = bm.u;
  s.eps = eps;
  s.target = target;
  s.rep = rep;
  HerschReport r = hersch_bound_check(s, m, solver);
  r.balanced_parameter = bm.a;
  return r;
}

nlohmann::json HerschReport::to_json() const {
  nlohmann::json j{{"target", target == GLTarget::Closed ? "closed" : "free-boundary"},
                   {"eps", eps},
                   {"energy", energy},
                   {"normalized_first", normalized_first},
                   {"imbalance", imbalance},
                   {"lhs", lhs},
                   {"rhs", rhs},
                   {"first", first},
                   {"slack", slack},
                   {"literal_slack", literal_slack},
                   {"fitted_c", fitted_c},
                   {"holds", holds()}};
  if (balanced_parameter) j["balanced_parameter"] = std::vector<double>(balanced_parameter->data(), balanced_parameter->data() + balanced_parameter->size());
  return j;
}

}  // namespace eigenmax
