// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-9 are gated; 10 is reported only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eigenmax/cli.hpp"
#include "eigenmax/conformal.hpp"
#include "eigenmax/eigenmap.hpp"
#include "eigenmax/error.hpp"
#include "eigenmax/fem.hpp"
#include "eigenmax/gl.hpp"
#include "eigenmax/mesh.hpp"
#include "eigenmax/taxonomy.hpp"

using namespace eigenmax;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances.
constexpr double kRelTol = 0.01;             // criteria 1-4 and the k = 1 cylinder energy
constexpr double kRuntimeSphere = 60.0;      // seconds, criterion 1
constexpr int kSphereVertices = 10000;
constexpr double kExtensionC = 10.0;         // criterion 5
constexpr double kRuntimeTaxonomy = 10.0;    // seconds, criterion 7
constexpr double kNormTol = 1e-6;            // max |u| <= 1 + kNormTol
constexpr double kEnergyAreaTol = 1e-8;
constexpr double kHerschTol = 1e-8;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

std::string fmt(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

MatrixXd positions(const SymmetricMesh& m) {
  MatrixXd u(m.num_vertices(), 3);
  for (int v = 0; v < m.num_vertices(); ++v) u.row(v) = m.positions[v].transpose();
  return u;
}

// Group average of a positive perturbation, so the start is an admissible invariant density.
SymmetricMesh perturbed(const SymmetricMesh& m, const std::function<double(const Eigen::Vector3d&)>& f) {
  std::vector<double> rho(m.num_vertices(), 0.0);
  for (const auto& p : m.action.perms)
    for (int v = 0; v < m.num_vertices(); ++v) rho[v] += f(m.positions[p[v]]) / m.action.size();
  return set_density(m, rho);
}

double wobble(const Eigen::Vector3d& p) { return std::exp(0.5 * p.z() + 0.3 * p.x() * p.y()); }

TypeB type(int f, std::array<int, 3> e = {0, 0, 0}, std::array<int, 3> v = {0, 0, 0}) {
  TypeB b;
  b.f = f;
  b.e = e;
  b.v = v;
  return b;
}

// Optimized meshes reused by the nodal checks.
struct Optimum {
  std::string name;
  SymmetricMesh mesh;
  ProblemKind kind;
};
std::vector<Optimum> g_optima;

Spectrum spectrum_of(const SymmetricMesh& m, ProblemKind kind, int count) {
  return kind == ProblemKind::Laplace ? laplace_spectrum(m, count) : steklov_spectrum(m, count);
}

// ---------------------------------------------------------------------------------------------

void sphere_maximum(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.command = "optimize";
  cfg.source = R"({"family":"M","group":{"kind":"Trivial","params":[]},"b":{"f":1}})";
  cfg.resolution = kSphereVertices;
  const CommandResult r = cmd_optimize(cfg);
  const double cmd_time = seconds_since(t0);
  o.require(r.exit_code == 0, "optimize exit code");
  const double value = r.report.value("objective", 0.0);
  const int verts = r.report.value("vertices", 0);
  o.detail << "cmd_optimize M(1): " << verts << " vertices, value " << fmt(value) << " vs 8pi " << fmt(8 * kPi)
           << " in " << fmt(cmd_time, 3) << " s";
  o.require(verts >= kSphereVertices, "resolution");
  o.require(within(value, 8 * kPi, kRelTol), "8 pi within 1%");
  o.require(cmd_time < kRuntimeSphere, "runtime");

  // Same mesh from a perturbed invariant density.
  const auto t1 = std::chrono::steady_clock::now();
  const SymmetricMesh m =
      perturbed(descriptor_mesh(SurfaceDescriptor::closed(trivial_group(), type(1)), kSphereVertices), wobble);
  OptimizerOptions opts;
  opts.guard = brs_guard(m);
  const OptimizationState st = maximize(m, ProblemKind::Laplace, opts);
  const double asc_time = seconds_since(t1);
  o.detail << "; perturbed start " << fmt(st.history.front().objective) << " -> " << fmt(st.objective) << " in "
           << fmt(asc_time, 3) << " s";
  o.require(within(st.objective, 8 * kPi, kRelTol), "perturbed ascent within 1%");
  o.require(asc_time < kRuntimeSphere, "perturbed runtime");
  g_optima.push_back({"sphere", set_density(m, st.density), ProblemKind::Laplace});
}

void disk_maximum(Outcome& o) {
  const SymmetricMesh d = unit_disk(4);
  const Spectrum sp = steklov_spectrum(d, 11);
  double worst = 0;
  for (int k = 1; k <= 5; ++k)
    for (int j : {2 * k - 1, 2 * k}) worst = std::max(worst, std::abs(sp.eigenvalues[j] - k) / k);
  o.detail << "disk " << d.num_vertices() << " vertices: max rel error of sigma_k = k (k <= 5) " << fmt(worst, 3);
  o.require(worst <= kRelTol, "sigma_k = k");

  const SymmetricMesh n = perturbed(
      descriptor_mesh(SurfaceDescriptor::bounded_tau(trivial_group(), type(1)), 2000), wobble);
  OptimizerOptions opts;
  opts.guard = brs_guard(n);
  const OptimizationState st = maximize(n, ProblemKind::Steklov, opts);
  o.detail << "; N_tau(1): " << fmt(st.history.front().objective) << " -> " << fmt(st.objective) << " vs 2pi "
           << fmt(2 * kPi);
  o.require(within(st.objective, 2 * kPi, kRelTol), "2 pi within 1%");
  g_optima.push_back({"disk", set_density(n, st.density), ProblemKind::Steklov});
}

void flat_torus(Outcome& o) {
  const SymmetricMesh t = flat_square_torus(3);
  const Spectrum sp = laplace_spectrum(t, 8);
  const int dim = static_cast<int>(sp.first_cluster().size());
  o.detail << "square torus " << t.num_vertices() << " vertices: value " << fmt(sp.normalized_first()) << " vs 4pi^2 "
           << fmt(4 * kPi * kPi) << ", cluster " << dim;
  o.require(within(sp.normalized_first(), 4 * kPi * kPi, kRelTol), "4 pi^2 within 1%");
  o.require(dim == 4, "cluster dimension 4");
  g_optima.push_back({"torus", t, ProblemKind::Laplace});
}

void mixed_cylinder(Outcome& o) {
  const auto bc = BoundaryConditionMap::parse("outer=steklov,free=neumann");
  double worst = 0;
  for (double L : {0.5, 1.0, 2.0}) {
    const Spectrum sp = mixed_spectrum(flat_cylinder_m(L, 96), bc, 7);
    for (int k = 1; k <= 3; ++k) {
      const double exact = k * std::tanh(k * L);
      for (int j : {2 * k - 1, 2 * k}) worst = std::max(worst, std::abs(sp.eigenvalues[j] - exact) / exact);
    }
  }
  o.detail << "max rel error vs k tanh(kL) over L in {0.5,1,2}, k <= 3: " << fmt(worst, 3);
  o.require(worst <= kRelTol, "k tanh(kL)");
}

void extension_bound(Outcome& o) {
  const int rings = 24, m = 6 * rings;
  const SymmetricMesh disk = unit_disk_rings(rings);
  std::vector<int> disk_ring(m, -1);
  for (int v = 0; v < disk.num_vertices(); ++v) {
    const auto& p = disk.positions[v];
    if (std::abs(p.head<2>().norm() - 1) > 1e-12) continue;
    const int k = static_cast<int>(std::lround(std::atan2(p.y(), p.x()) / (2 * kPi) * m));
    disk_ring[((k % m) + m) % m] = v;
  }
  std::vector<int> cyl_ring(m);
  for (int i = 0; i < m; ++i) cyl_ring[i] = i;  // t = 0 row of the cylinder grid

  double fitted = 0, worst_k1 = 0;
  for (double L : {1.0, 2.0, 3.0}) {
    const SymmetricMesh cyl = flat_cylinder_m(L, m);
    std::mt19937_64 rng(static_cast<std::uint64_t>(L * 1000));
    std::normal_distribution<double> normal;
    for (int s = 0; s < 50; ++s) {
      // Random trace data with W^{1/2}-type decay of Fourier coefficients.
      VectorXd beta = VectorXd::Zero(m);
      for (int k = 1; k <= 8; ++k) {
        const double a = normal(rng) / k, b = normal(rng) / k;
        for (int i = 0; i < m; ++i) beta[i] += a * std::cos(2 * kPi * k * i / m) + b * std::sin(2 * kPi * k * i / m);
      }
      const double ed = harmonic_extension(disk, disk_ring, beta).energy;
      const double ec = harmonic_extension(cyl, cyl_ring, beta).energy;
      fitted = std::max(fitted, (ed / ec - 1) * std::exp(2 * L));
    }
    VectorXd cos1(m);
    for (int i = 0; i < m; ++i) cos1[i] = std::cos(2 * kPi * i / m);
    const double e1 = harmonic_extension(cyl, cyl_ring, cos1).energy;
    // Separation of variables: (1/(1+e^{-2L}) - 1/(1+e^{2L})) times the L2 norm pi of cos.
    const double exact = kPi * (1 / (1 + std::exp(-2 * L)) - 1 / (1 + std::exp(2 * L)));
    worst_k1 = std::max(worst_k1, std::abs(e1 - exact) / exact);
  }
  o.detail << "150 samples, fitted C " << fmt(fitted, 4) << " (limit " << kExtensionC << "), k=1 energy max rel error "
           << fmt(worst_k1, 3);
  o.require(fitted <= kExtensionC, "fitted C");
  o.require(worst_k1 <= kRelTol, "k = 1 cylinder energy");
}

void brs_guards(Outcome& o) {
  struct Run {
    std::string name;
    SurfaceDescriptor d;
    ProblemKind kind;
  };
  const std::vector<Run> runs{
      {"M(1*;2r1)", SurfaceDescriptor::closed(one_star(), type(0, {2, 0, 0})), ProblemKind::Laplace},
      {"M(1*;1+r1)", SurfaceDescriptor::closed(one_star(), type(1, {1, 0, 0})), ProblemKind::Laplace},
      {"M(*22;2r1r2)", SurfaceDescriptor::closed(dihedral_star(2), type(0, {0, 0, 0}, {2, 0, 0})),
       ProblemKind::Laplace},
      {"N_tau(1;2)", SurfaceDescriptor::bounded_tau(trivial_group(), type(2)), ProblemKind::Steklov},
      {"N_tau(1;3)", SurfaceDescriptor::bounded_tau(trivial_group(), type(3)), ProblemKind::Steklov},
      {"N_tau(1*;1+r1)", SurfaceDescriptor::bounded_tau(one_star(), type(1, {1, 0, 0})), ProblemKind::Steklov},
  };
  int iterates = 0;
  for (const auto& run : runs) {
    const SymmetricMesh m = perturbed(descriptor_mesh(run.d, 1500), wobble);
    const bool closed = run.kind == ProblemKind::Laplace;
    const double bound = closed ? 16 * kPi : 4 * kPi;
    OptimizerOptions opts;
    opts.guard = brs_guard(m);
    o.require(opts.guard == bound, run.name + " guard");
    const OptimizationState st = maximize(m, run.kind, opts);
    bool below = st.objective < bound;
    for (const auto& h : st.history) below = below && h.objective < bound;
    iterates += static_cast<int>(st.history.size());
    const SymmetricMesh mo = set_density(m, st.density);
    const int dim = static_cast<int>(st.cluster_basis.cols());
    const std::string inv = mo.action.find("tau") >= 0 ? "tau" : "";
    const StructureReport sr = structure_report(mo, spectrum_of(mo, run.kind, dim + 5), inv, run.d.genus());
    o.detail << run.name << " " << fmt(st.objective, 5) << " dim " << dim;
    if (!inv.empty()) o.detail << " (even " << sr.even << ", odd " << sr.odd << ")";
    o.detail << "; ";
    o.require(below, run.name + " below " + (closed ? "16 pi" : "4 pi"));
    o.require(dim <= (closed ? 4 : 3), run.name + " cluster dimension");
    o.require(sr.parity_bounds, run.name + " parity split");
    g_optima.push_back({run.name, mo, run.kind});
  }
  o.detail << iterates << " iterates checked";
}

// Clause evaluation written out directly from the classification statement.
unsigned clauses_by_hand(int g, int k, bool plus, int F, int Cm, int Cp, int Tm, int Tp, int W) {
  const int C = Cm + Cp, T = Tm + Tp;
  unsigned bad = 0;
  const bool one = (C + W >= 1) && (T == 0 || T == 1);
  bool two = true;
  if (T == 0 && k != 0 && k != 2) two = false;
  if (k == 0 && T != 0) two = false;
  bool three = true, four = true;
  if (plus) three = F == 0 && Cm == 0 && Tm == 0 && Cp + Tp == g + 1;
  if (!plus) four = F + 2 * (C + T) == g + 2;
  if (!one) bad |= 1;
  if (!two) bad |= 2;
  if (!three) bad |= 4;
  if (!four) bad |= 8;
  return bad;
}

void taxonomy_suite(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  long long checked = 0, mismatches = 0, valid = 0, euler_bad = 0;
  static const char* names[] = {"clause-i", "clause-ii", "clause-iii", "clause-iv"};
  for (int g = 0; g <= 6; ++g)
    for (int k = 0; k <= 4; ++k)
      for (int e = 0; e < 2; ++e)
        for (int F = 0; F <= 8; ++F)
          for (int Cm = 0; Cm <= 8; ++Cm)
            for (int Cp = 0; Cp <= 8; ++Cp)
              for (int Tm = 0; Tm <= 8; ++Tm)
                for (int Tp = 0; Tp <= 8; ++Tp)
                  for (int W = 0; W <= 8; ++W) {
                    const Species s{g, k, e == 0, F, Cm, Cp, Tm, Tp, W};
                    const unsigned want = clauses_by_hand(g, k, e == 0, F, Cm, Cp, Tm, Tp, W);
                    const SpeciesReport r = validate_species(s);
                    std::vector<std::string> expect;
                    for (int i = 0; i < 4; ++i)
                      if (want & (1u << i)) expect.emplace_back(names[i]);
                    ++checked;
                    if (r.valid != (want == 0) || r.violations != expect) ++mismatches;
                    if (want == 0) {
                      ++valid;
                      const int chi = e == 0 ? 2 - 2 * g - k : 2 - g - k;
                      if (euler_char(s) != chi) ++euler_bad;
                    }
                  }
  o.detail << checked << " species, " << valid << " valid, " << mismatches << " mismatches, " << euler_bad
           << " Euler failures";
  o.require(mismatches == 0, "species clauses");
  o.require(euler_bad == 0, "Euler formula");

  std::vector<ReflectionGroup> groups{one_star(), platonic(2, 3, 3), platonic(2, 3, 4), platonic(2, 3, 5)};
  for (int k = 2; k <= 8; ++k) groups.push_back(dihedral_star(k));
  int types = 0, genus_bad = 0, edges = 0, edge_bad = 0;
  for (const auto& G : groups) {
    const int r = G.rank();
    for (int f = 0; f <= 4; ++f)
      for (int e1 = 0; e1 <= 4; ++e1)
        for (int e2 = 0; e2 <= (r >= 2 ? 4 : 0); ++e2)
          for (int e3 = 0; e3 <= (r >= 3 ? 4 : 0); ++e3)
            for (int v12 = 0; v12 <= (r >= 2 ? 4 : 0); ++v12)
              for (int v13 = 0; v13 <= (r >= 3 ? 4 : 0); ++v13)
                for (int v23 = 0; v23 <= (r >= 3 ? 4 : 0); ++v23) {
                  const int size = f + e1 + e2 + e3 + v12 + v13 + v23;
                  if (size == 0 || size > 4) continue;
                  TypeB b = type(f, {e1, e2, e3});
                  if (r >= 2) b.vij(1, 2) = v12;
                  if (r >= 3) {
                    b.vij(1, 3) = v13;
                    b.vij(2, 3) = v23;
                  }
                  try {
                    check_type(G, b);
                  } catch (const Error& err) {
                    if (err.code() == ErrorCode::NonIntegerGenus) ++genus_bad;
                    continue;
                  }
                  ++types;
                  int genus = -1;
                  try {
                    genus = genus_of_type(G, b);
                  } catch (const Error&) {
                  }
                  if (genus < 0) {
                    ++genus_bad;
                    continue;
                  }
                  const auto d = SurfaceDescriptor::closed(G, b);
                  for (const auto& list : {elementary_degenerations(d), all_case_degenerations(d)})
                    for (const auto& edge : list) {
                      ++edges;
                      if (!(edge.child.genus() < edge.parent.genus())) ++edge_bad;
                    }
                }
  }
  const double t = seconds_since(t0);
  o.detail << "; " << types << " types over " << groups.size() << " groups, " << genus_bad << " bad genera, " << edges
           << " degeneration edges, " << edge_bad << " not decreasing genus; " << fmt(t, 3) << " s";
  o.require(genus_bad == 0, "genus values");
  o.require(edge_bad == 0, "degenerations decrease genus");
  o.require(t < kRuntimeTaxonomy, "runtime");
}

// (cos 2 pi x, sin 2 pi x, cos 2 pi y, sin 2 pi y) / sqrt 2 on the square torus grid.
MatrixXd clifford_map(const SymmetricMesh& m, int level) {
  const int nx = 8 << level;
  MatrixXd u(m.num_vertices(), 4);
  for (int v = 0; v < m.num_vertices(); ++v) {
    const double a = 2 * kPi * (v % nx) / nx, b = 2 * kPi * (v / nx) / nx;
    u.row(v) << std::cos(a), std::sin(a), std::cos(b), std::sin(b);
  }
  return u / std::sqrt(2.0);
}

GLState gl_state(const MatrixXd& u, double eps, GLTarget t, const Representation& rep) {
  GLState s;
  s.u = u;
  s.eps = eps;
  s.target = t;
  s.rep = rep;
  return s;
}

void gl_suite(Outcome& o) {
  struct Case {
    std::string name;
    SymmetricMesh mesh;
    MatrixXd u0;
    GLTarget target;
    double eps;
  };
  std::vector<Case> cases;
  {
    const SymmetricMesh s = round_sphere(3);
    cases.push_back({"sphere", s, positions(s), GLTarget::Closed, 0.25});
    const SymmetricMesh t = flat_square_torus(2);
    cases.push_back({"torus", t, clifford_map(t, 2), GLTarget::Closed, 0.1});
    const SymmetricMesh d = unit_disk(2);
    cases.push_back({"disk", d, positions(d).leftCols(2), GLTarget::FreeBoundary, 0.1});
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1, 1);
  for (const auto& c : cases) {
    // Central differences against the analytic gradient on a random map.
    GLState st = gl_state(c.u0, c.eps, c.target, {});
    for (int i = 0; i < st.u.size(); ++i) st.u.data()[i] += 0.3 * unif(rng);
    MatrixXd dir(st.u.rows(), st.u.cols());
    for (int i = 0; i < dir.size(); ++i) dir.data()[i] = unif(rng);
    const double exact = (gl_gradient(st, c.mesh).array() * dir.array()).sum();
    auto fd = [&](double h) {
      GLState p = st, q = st;
      p.u += h * dir;
      q.u -= h * dir;
      return (energy(p, c.mesh) - energy(q, c.mesh)) / (2 * h);
    };
    const double e1 = std::abs(fd(2e-3) - exact), e2 = std::abs(fd(1e-3) - exact);
    const double order = std::log2(e1 / e2);

    const Representation rep = fitted_representation(c.mesh, c.u0, gl_weights(c.mesh, c.target));
    const GLDescentResult res = gl_descent(gl_state(c.u0, c.eps, c.target, rep), c.mesh);
    const double maxn = max_norm(res.state);
    const double e = energy(res.state, c.mesh), half_area = 0.5 * induced_area(res.state, c.mesh);
    const HerschReport h = hersch_bound_check(res.state, c.mesh);
    o.detail << c.name << ": fd order " << fmt(order, 3) << ", max|u| " << fmt(maxn, 8) << ", E " << fmt(e, 6)
             << " <= A/2 " << fmt(half_area, 6) << ", imbalance " << fmt(h.imbalance, 2);
    o.require(order > 1.8 && order < 2.2, c.name + " gradient order");
    o.require(res.converged, c.name + " descent converged");
    o.require(maxn <= 1 + kNormTol, c.name + " max norm");
    o.require(e <= half_area + kEnergyAreaTol, c.name + " energy-area");
    o.require(h.imbalance < 1e-10, c.name + " balanced");
    if (c.target == GLTarget::Closed) {
      // The stated form uses lambda_1 <= 1; check it on the same mesh scaled to lambda_1 = 1.
      const SymmetricMesh unit = unit_first_eigenvalue(c.mesh, ProblemKind::Laplace);
      const GLDescentResult ru = gl_descent(res.state, unit);
      const HerschReport hu = hersch_bound_check(ru.state, unit);
      o.detail << ", (2+eps)E - (1-eps)lambda_bar " << fmt(hu.literal_slack, 4) << " at lambda_1 = " << fmt(hu.first, 6)
               << "; ";
      o.require(ru.converged && within(hu.first, 1.0, 1e-9), c.name + " unit scaling");
      o.require(hu.literal_slack >= -kHerschTol, c.name + " Hersch inequality");
    } else {
      o.detail << ", 2F - sigma_bar + 2 sigma_1 sqrt(eps L F) " << fmt(h.slack, 4) << " (fitted C " << fmt(h.fitted_c, 3)
               << "); ";
      o.require(h.holds(kHerschTol), c.name + " free-boundary bound");
    }
  }
}

// Catenoidal annulus modulus maximizing the normalized first Steklov eigenvalue.
double best_annulus_modulus(int around) {
  auto value = [&](double T) {
    OptimizerOptions opts;
    return maximize(conformal_annulus_m(T, around), ProblemKind::Steklov, opts).objective;
  };
  double a = 0.9, b = 1.5;
  const double r = (std::sqrt(5.0) - 1) / 2;
  double c = b - r * (b - a), d = a + r * (b - a), fc = value(c), fd = value(d);
  while (b - a > 1e-4) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = value(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = value(d);
    }
  }
  return 0.5 * (a + b);
}

void nodal_morse(Outcome& o) {
  int functions = 0, bad = 0;
  for (const auto& opt : g_optima) {
    const Spectrum sp = spectrum_of(opt.mesh, opt.kind, 10);
    for (int i : sp.first_cluster()) {
      ++functions;
      if (nodal_domain_count(sp.eigenvectors.col(i), opt.mesh) != 2) {
        ++bad;
        o.detail << opt.name << " member " << i << " has " << nodal_domain_count(sp.eigenvectors.col(i), opt.mesh)
                 << " nodal domains; ";
      }
    }
  }
  o.detail << functions << " first-cluster functions on " << g_optima.size() << " optima, " << bad
           << " without two nodal domains";
  o.require(bad == 0, "two nodal domains");

  const int around = 64;
  const double T = best_annulus_modulus(around);
  const SymmetricMesh ann0 = conformal_annulus_m(T, around);
  const OptimizationState st = maximize(ann0, ProblemKind::Steklov);
  const SymmetricMesh ann = set_density(ann0, st.density);
  const Spectrum sp = steklov_spectrum(ann, 8);
  // Lowest tau-even Steklov eigenfunction, made even under ry so its critical points sit on vertices.
  const int tau = ann.action.find("tau"), ry = ann.action.find("ry");
  VectorXd even;
  double even_value = 0;
  for (int i = sp.zero_modes; i < sp.size() && even.size() == 0; ++i) {
    const VectorXd f = sp.eigenvectors.col(i);
    VectorXd ft(f.size());
    for (int v = 0; v < f.size(); ++v) ft[v] = f[ann.action.perms[tau][v]];
    if ((f - ft).norm() > 1e-6 * f.norm()) {
      // Possibly a mixture inside a degenerate pair; take its even part.
      const VectorXd e = 0.5 * (f + ft);
      if (e.norm() < 1e-3 * f.norm()) continue;
      even = e;
    } else {
      even = f;
    }
    even_value = sp.eigenvalues[i];
  }
  if (even.size() == 0) throw Error(ErrorCode::EmptyCluster, "no tau-even Steklov eigenfunction found");
  VectorXd sym(even.size());
  for (int v = 0; v < even.size(); ++v) sym[v] = even[v] + even[ann.action.perms[ry][v]];
  if (sym.norm() < 1e-6 * even.norm())
    for (int v = 0; v < even.size(); ++v) sym[v] = even[v] - even[ann.action.perms[ry][v]];
  const MorseReport mr = morse_count_check(sym, ann, "tau");
  int on_ovals = 0;
  for (int c : mr.per_oval) on_ovals += c;
  o.detail << "; annulus optimum T = " << fmt(T, 5) << " (T tanh T = " << fmt(T * std::tanh(T), 5)
           << "), value " << fmt(st.objective, 6) << ", even eigenvalue " << fmt(even_value, 5) << ", first "
           << fmt(sp.first_nonzero(), 5) << ": " << on_ovals << " critical points on " << mr.ovals << " oval(s), "
           << mr.interior_off_fixed << " interior off the oval";
  o.require(mr.ovals == 1 && on_ovals == 2, "two fixed-set critical points");
  o.require(mr.interior_off_fixed == 0, "no interior critical points off the oval");
  o.require(mr.inequality, "Morse inequality");
}

void genus_two_report(Outcome& o) {
  const auto d = SurfaceDescriptor::closed(one_star(), type(1, {1, 0, 0}));
  const SymmetricMesh m = perturbed(descriptor_mesh(d, 3000), wobble);
  OptimizerOptions opts;
  opts.guard = brs_guard(m);
  const OptimizationState st = maximize(m, ProblemKind::Laplace, opts);
  const double clifford = 4 * kPi * kPi;
  o.detail << "M(1*;1+r1) genus 2, " << m.num_vertices() << " vertices: value " << fmt(st.objective)
           << ", cluster " << st.cluster_basis.cols() << ", 4pi^2 = " << fmt(clifford) << " -> "
           << (st.objective > clifford ? "exceeding" : "not exceeding");
  o.pass = st.objective > clifford;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    void (*run)(Outcome&);
    bool gated;
  };
  const std::vector<Criterion> criteria{
      {1, "sphere maximum", sphere_maximum, true},
      {2, "disk Steklov maximum", disk_maximum, true},
      {3, "flat torus", flat_torus, true},
      {4, "mixed cylinder spectrum", mixed_cylinder, true},
      {5, "harmonic-extension bound", extension_bound, true},
      {6, "reflection-surface bounds as guards", brs_guards, true},
      {7, "taxonomy exhaustive suite", taxonomy_suite, true},
      {8, "Ginzburg-Landau suite", gl_suite, true},
      {9, "nodal and Morse structure", nodal_morse, true},
      {10, "genus-two comparison with 4 pi^2 (reported, not gated)", genus_two_report, false},
  };
  bool all = true;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail.str()
              << " {" << fmt(seconds_since(t0), 3) << " s}" << std::endl;
    if (c.gated) all = all && o.pass;
  }
  std::cout << (all ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " (criteria 1-9 gated)" << std::endl;
  return all ? 0 : 1;
}
