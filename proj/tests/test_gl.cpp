#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigenmax/error.hpp"
#include "eigenmax/fem.hpp"
#include "eigenmax/gl.hpp"

using namespace eigenmax;
using Eigen::MatrixXd;
using Eigen::VectorXd;
constexpr double kPi = std::numbers::pi;

namespace {

MatrixXd positions(const SymmetricMesh& m) {
  MatrixXd u(m.num_vertices(), 3);
  for (int v = 0; v < m.num_vertices(); ++v) u.row(v) = m.positions[v].transpose();
  return u;
}

MatrixXd unit_rows(MatrixXd u) {
  for (int v = 0; v < u.rows(); ++v) u.row(v).normalize();
  return u;
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

MatrixXd random_map(int rows, int cols, unsigned seed, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  MatrixXd u(rows, cols);
  for (int i = 0; i < u.size(); ++i) u.data()[i] = d(rng);
  return u;
}

GLState state(MatrixXd u, double eps, GLTarget t = GLTarget::Closed, Representation rep = {}) {
  GLState s;
  s.u = std::move(u);
  s.eps = eps;
  s.target = t;
  s.rep = std::move(rep);
  return s;
}

SymmetricMesh noisy_density(SymmetricMesh m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.7, 1.3);
  for (auto& r : m.density) r = d(rng);
  return m;
}

}  // namespace

TEST_CASE("energies of constant and zero maps") {
  const auto s = round_sphere(2);
  MatrixXd c = MatrixXd::Zero(s.num_vertices(), 3);
  c.col(1).setOnes();
  CHECK(gl_energy(state(c, 0.3), s) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gl_gradient(state(c, 0.3), s).cwiseAbs().maxCoeff() < 1e-12);
  const double eps = 0.3;
  CHECK(gl_energy(state(MatrixXd::Zero(s.num_vertices(), 3), eps), s) ==
        doctest::Approx(area(s) / (4 * eps * eps)).epsilon(1e-12));

  const auto d = unit_disk(2);
  const double L = gl_weights(d, GLTarget::FreeBoundary).sum();
  CHECK(L == doctest::Approx(boundary_length(d)).epsilon(1e-12));
  CHECK(fb_gl_energy(state(MatrixXd::Zero(d.num_vertices(), 2), eps, GLTarget::FreeBoundary), d) ==
        doctest::Approx(L / (4 * eps)).epsilon(1e-12));
}

TEST_CASE("identity map of the round sphere has energy 4 pi") {
  const auto s = round_sphere(4);
  const auto st = state(positions(s), 1.0);
  const SpMat K = assemble_stiffness(s);
  double oracle = 0;
  for (int c = 0; c < 3; ++c) oracle += 0.5 * st.u.col(c).dot(K * st.u.col(c));
  CHECK(gl_energy(st, s) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(gl_energy(st, s) == doctest::Approx(4 * kPi).epsilon(1e-2));
}

TEST_CASE("gradient matches central differences to second order") {
  for (auto target : {GLTarget::Closed, GLTarget::FreeBoundary}) {
    const auto m = noisy_density(target == GLTarget::Closed ? round_sphere(1) : unit_disk(1), 3);
    const auto st = state(random_map(m.num_vertices(), 3, 7, 0.8), 0.4, target);
    const MatrixXd g = gl_gradient(st, m);
    const MatrixXd dir = random_map(m.num_vertices(), 3, 11);
    const double exact = (g.array() * dir.array()).sum();
    auto fd = [&](double h) {
      auto p = st, q = st;
      p.u += h * dir;
      q.u -= h * dir;
      return (energy(p, m) - energy(q, m)) / (2 * h);
    };
    const double e1 = std::abs(fd(1e-2) - exact), e2 = std::abs(fd(5e-3) - exact);
    CAPTURE(e1);
    CAPTURE(e2);
    CHECK(e2 < 1e-4 * std::abs(exact));
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("representations, averaging and fixed subspaces") {
  const auto s = round_sphere(2);
  const MatrixXd x = positions(s);
  const auto rep = fitted_representation(s, x, mass_diagonal(s));
  REQUIRE(rep.mats.size() == static_cast<size_t>(s.action.size()));
  for (const auto& R : rep.mats) {
    CHECK((R.transpose() * R - MatrixXd::Identity(3, 3)).norm() == 0.0);
    CHECK(R.cwiseAbs().sum() == 3.0);
  }
  CHECK(equivariance_defect(s, rep, x) < 1e-12);
  CHECK(fixed_subspace(rep).cols() == 0);
  const MatrixXd r = average_equivariant(s, rep, random_map(s.num_vertices(), 3, 1));
  CHECK(equivariance_defect(s, rep, r) < 1e-14);
  CHECK((average_equivariant(s, rep, r) - r).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(fixed_subspace(trivial_representation(s, 3)).cols() == 3);
}

TEST_CASE("descent from a constant map stays put") {
  const auto s = round_sphere(2);
  MatrixXd c = MatrixXd::Zero(s.num_vertices(), 3);
  c.col(0).setOnes();
  const auto res = gl_descent(state(c, 0.5), s);
  CHECK(res.converged);
  CHECK(res.history.size() == 1);
  CHECK((res.state.u - c).norm() == 0.0);
}

TEST_CASE("equivariant descent on the sphere") {
  const auto s = round_sphere(3);
  const MatrixXd x = positions(s);
  const auto rep = fitted_representation(s, x, mass_diagonal(s));
  const double eps = 0.5;
  const auto res = gl_descent(state(x + 0.05 * random_map(s.num_vertices(), 3, 4), eps, GLTarget::Closed, rep), s);
  REQUIRE(res.converged);
  CHECK(res.history.back().residual < 1e-8);
  CHECK(res.max_equivariance_defect < 1e-12);
  CHECK(max_norm(res.state) <= 1 + 1e-6);
  // The radial critical map c x has c^2 = 1 - 2 eps^2.
  const VectorXd M = mass_diagonal(s);
  const double mean_sq = M.dot(res.state.u.rowwise().squaredNorm()) / M.sum();
  CHECK(mean_sq == doctest::Approx(1 - 2 * eps * eps).epsilon(1e-2));
  CHECK(energy(res.state, s) <= 0.5 * induced_area(res.state, s) + 1e-8);
  for (size_t i = 1; i < res.history.size(); ++i) CHECK(res.history[i].energy <= res.history[i - 1].energy + 1e-12);
}

TEST_CASE("collapsed map has a residual that descent removes") {
  const auto s = round_sphere(2);
  MatrixXd u = positions(s);
  u.col(2).setZero();
  const auto rep = fitted_representation(s, positions(s), mass_diagonal(s));
  const auto st = state(u, 0.5, GLTarget::Closed, rep);
  const double r0 = gl_residual(st, s);
  CHECK(r0 > 1e-2);
  const auto res = gl_descent(st, s);
  CHECK(res.history.back().residual < 1e-3 * r0);
  CHECK(max_norm(res.state) <= 1 + 1e-6);
}

TEST_CASE("critical points on three benchmark meshes") {
  struct Case {
    SymmetricMesh mesh;
    MatrixXd u0;
    GLTarget target;
    double eps;
  };
  std::vector<Case> cases;
  cases.push_back({round_sphere(3), positions(round_sphere(3)), GLTarget::Closed, 0.25});
  {
    const auto t = flat_square_torus(2);
    cases.push_back({t, clifford_map(t, 2), GLTarget::Closed, 0.1});
  }
  {
    const auto d = unit_disk(2);
    cases.push_back({d, positions(d).leftCols(2), GLTarget::FreeBoundary, 0.1});
  }
  for (auto& c : cases) {
    const auto rep = fitted_representation(c.mesh, c.u0, mass_diagonal(c.mesh));
    const auto res = gl_descent(state(c.u0, c.eps, c.target, rep), c.mesh);
    REQUIRE(res.converged);
    CHECK(max_norm(res.state) <= 1 + 1e-6);
    CHECK(energy(res.state, c.mesh) <= 0.5 * induced_area(res.state, c.mesh) + 1e-8);
    CHECK(res.max_equivariance_defect < 1e-12);
    // Odd symmetries force a vanishing average, so the critical map is balanced.
    const auto h = hersch_bound_check(res.state, c.mesh);
    CHECK(h.imbalance < 1e-12);
    CHECK(h.holds());
    if (c.target == GLTarget::Closed) {
      // With lambda_1 = 1 the bound takes the form (2 + eps) E >= (1 - eps) normalized_first.
      const auto unit = unit_first_eigenvalue(c.mesh, ProblemKind::Laplace);
      auto st = res.state;
      const auto crit = gl_descent(st, unit);
      REQUIRE(crit.converged);
      const auto hu = hersch_bound_check(crit.state, unit);
      CHECK(hu.first == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(hu.normalized_first == doctest::Approx(h.normalized_first).epsilon(1e-9));
      CHECK(hu.literal_slack >= -1e-8);
    }
  }
}

TEST_CASE("continuation stops once the induced density settles") {
  const auto d = unit_disk(2);
  const MatrixXd x = positions(d).leftCols(2);
  const auto rep = fitted_representation(d, x, mass_diagonal(d));
  const auto res = gl_continuation(state(x, 1.0, GLTarget::FreeBoundary, rep), d, halving_schedule(14));
  CHECK(res.stages.size() >= 2);
  CHECK(res.stabilized);
  CHECK(res.density_change.back() < 1e-3);
  // Critical maps c (x, y) with c^2 = 1 - eps have induced length 2 pi and 2F = (1 - eps / 2) 2 pi.
  const auto& last = res.stages.back().state;
  CHECK(induced_area(last, d) == doctest::Approx(2 * kPi).epsilon(1e-2));
  CHECK(2 * energy(last, d) == doctest::Approx((1 - last.eps / 2) * induced_area(last, d)).epsilon(1e-2));
}

TEST_CASE("sweepout members") {
  const auto s = round_sphere(3);
  const MatrixXd x = positions(s);
  CHECK((sweepout(x, VectorXd::Zero(3)) - x).cwiseAbs().maxCoeff() < 1e-14);
  const VectorXd a = Eigen::Vector3d(0, 0.6, 0.8);
  const MatrixXd c = sweepout(x, a);
  for (int v = 0; v < c.rows(); ++v) CHECK((c.row(v).transpose() - a).norm() == 0.0);
  const MatrixXd g = sweepout(x, Eigen::Vector3d(0.2, -0.3, 0.1));
  CHECK((g.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(sweepout(x, Eigen::Vector3d(1, 1, 0)), Error);

  // Members with a in the fixed subspace stay equivariant.
  auto rep = fitted_representation(s, x, mass_diagonal(s));
  const MatrixXd zaxis = fixed_subspace(Representation{{rep.mats[0], rep.mats[s.action.find("rx")], rep.mats[s.action.find("ry")]}});
  REQUIRE(zaxis.cols() == 1);
  CHECK(std::abs(zaxis(2, 0)) == doctest::Approx(1.0));
  const MatrixXd u = sweepout(x, 0.7 * zaxis.col(0));
  for (int gi = 0; gi < s.action.size(); ++gi)
    if (rep.mats[gi](2, 2) == 1.0) {
      double d = 0;
      for (int v = 0; v < s.num_vertices(); ++v)
        d = std::max(d, (u.row(s.action.perms[gi][v]).transpose() - rep.mats[gi] * u.row(v).transpose()).norm());
      CHECK(d < 1e-12);
    }

  // Conformal members do not exceed the base energy beyond quadrature slack.
  std::vector<VectorXd> grid;
  for (double r : {0.0, 0.2, 0.4, 0.6})
    for (int k = 0; k < 6; ++k) {
      const double t = 2 * kPi * k / 6;
      grid.push_back(Eigen::Vector3d(r * std::cos(t) * 0.6, r * std::sin(t) * 0.8, r * 0.5));
    }
  const auto e = sweepout_energies(s, x, MatrixXd::Identity(3, 3), grid, GLTarget::Closed, 0.1);
  const double base = gl_energy(state(x, 0.1), s);
  for (double v : e) CHECK(v <= base * 1.05);
}

TEST_CASE("balanced members and the Hersch inequality") {
  SUBCASE("sphere identity is balanced and nearly sharp") {
    const auto s = round_sphere(4);
    const auto h = hersch_bound_check(state(positions(s), 1e-3), s);
    CHECK(h.imbalance < 1e-12);
    CHECK(2 * h.energy == doctest::Approx(h.normalized_first).epsilon(2e-2));
    CHECK(h.normalized_first == doctest::Approx(8 * kPi).epsilon(2e-2));
    CHECK(h.holds());
  }
  SUBCASE("off-center base map on a noisy sphere") {
    const auto s = noisy_density(round_sphere(2), 5);
    MatrixXd x = positions(s);
    x.col(0).array() += 0.4;
    x = unit_rows(x);
    const auto bm = balanced_member(s, x, {}, GLTarget::Closed);
    CHECK(bm.method == "newton");
    CHECK(bm.imbalance < 1e-4 * area(s));
    CHECK(bm.a.norm() < 1.0);
    for (double eps : {0.5, 0.1, 0.01}) {
      const auto h = hersch_bound_check(s, x, {}, GLTarget::Closed, eps);
      CHECK(h.balanced_parameter.has_value());
      CHECK(h.holds());
    }
  }
  SUBCASE("one-dimensional fixed subspace uses bisection") {
    const auto s = round_sphere(2);
    MatrixXd x = positions(s);
    // Only the reflections fixing the z axis.
    SymmetricMesh t = s;
    t.action = GroupAction::generate(t.num_vertices(), {"rx", "ry"},
                                     {s.action.perms[s.action.find("rx")], s.action.perms[s.action.find("ry")]},
                                     {1, 1});
    Representation ax = fitted_representation(t, x, mass_diagonal(t));
    x.col(2).array() += 0.5;
    x = unit_rows(x);
    const auto bm = balanced_member(t, x, ax, GLTarget::Closed);
    CHECK(bm.method == "bisection");
    CHECK(bm.imbalance < 1e-4 * area(t));
    CHECK(std::abs(bm.a[0]) < 1e-12);
    CHECK(std::abs(bm.a[1]) < 1e-12);
  }
  SUBCASE("any balanced map satisfies the discrete inequality") {
    for (auto m : {noisy_density(round_sphere(2), 1), flat_square_torus(1)}) {
      for (unsigned seed = 0; seed < 5; ++seed) {
        MatrixXd u = random_map(m.num_vertices(), 3, seed);
        const VectorXd M = mass_diagonal(m);
        const VectorXd mean = u.transpose() * M / M.sum();
        u.rowwise() -= mean.transpose();
        const auto unit = unit_first_eigenvalue(m, ProblemKind::Laplace);
        for (double eps : {1.0, 0.3, 0.05}) {
          CHECK(hersch_bound_check(state(u, eps), m).slack >= -1e-8);
          CHECK(hersch_bound_check(state(u, eps), unit).literal_slack >= -1e-8);
        }
      }
    }
  }
  SUBCASE("disk free-boundary bound with fitted constant") {
    const auto d = unit_disk(3);
    MatrixXd x = positions(d).leftCols(2);
    x.col(0).array() += 0.3;
    for (double eps : {0.2, 0.05, 0.01}) {
      const auto h = hersch_bound_check(d, x, {}, GLTarget::FreeBoundary, eps);
      CHECK(h.holds());
      CHECK(h.normalized_first == doctest::Approx(2 * kPi).epsilon(1e-2));
      CHECK(h.fitted_c < 10.0);
    }
  }
  SUBCASE("too coarse a search reports no balanced member") {
    const auto s = round_sphere(1);
    CHECK_THROWS_AS(balanced_member(s, unit_rows(positions(s)), {}, GLTarget::Closed, 2, 0.0), Error);
  }
}

TEST_CASE("state serialization round trip") {
  const auto s = round_sphere(1);
  const auto st = state(positions(s), 0.25, GLTarget::Closed, fitted_representation(s, positions(s), mass_diagonal(s)));
  const auto back = GLState::from_json(st.to_json());
  CHECK((back.u - st.u).norm() == 0.0);
  CHECK(back.eps == 0.25);
  CHECK(back.rep.mats.size() == st.rep.mats.size());
  CHECK_THROWS_AS(GLState::from_json(nlohmann::json{{"eps", 1.0}}), Error);
}
