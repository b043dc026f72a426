#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eigenmax/equivariant.hpp"
#include "eigenmax/error.hpp"

using namespace eigenmax;
constexpr double kPi = std::numbers::pi;

namespace {
// Genus-2 surface with the Klein four-group {1, r1, tau, r1 tau}.
SymmetricMesh klein_genus_two() {
  TypeB b;
  b.e = {3, 0, 0};
  return reflect_assemble(chamber_mesh(one_star(), b, 0.15), full_assembly(one_star()));
}

Eigen::VectorXd random_field(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f[i] = g(rng);
  return f;
}

std::vector<double> merged(const Spectrum& a, const Spectrum& b, int k) {
  std::vector<double> out(a.eigenvalues);
  out.insert(out.end(), b.eigenvalues.begin(), b.eigenvalues.end());
  std::sort(out.begin(), out.end());
  out.resize(k);
  return out;
}
}  // namespace

TEST_CASE("invariant averaging is an exact mass-orthogonal projection") {
  const auto m = klein_genus_two();
  REQUIRE(m.action.size() == 4);
  const auto f = random_field(m.num_vertices(), 3);
  const auto pf = average_invariant(m, f);
  for (const auto& p : m.action.perms)
    for (int v = 0; v < m.num_vertices(); ++v) CHECK(pf[p[v]] == pf[v]);
  CHECK((average_invariant(m, pf) - pf).norm() <= 1e-14 * pf.norm());
  const auto g = random_field(m.num_vertices(), 4);
  const Eigen::VectorXd w = mass_diagonal(m);
  const double ip = (pf.array() * w.array() * (g - average_invariant(m, g)).array()).sum();
  CHECK(std::abs(ip) < 1e-10 * f.norm() * g.norm());
  // Indicator of one vertex spreads evenly over its orbit.
  Eigen::VectorXd e = Eigen::VectorXd::Zero(m.num_vertices());
  e[0] = 1;
  const auto pe = average_invariant(m, e);
  CHECK(pe.sum() == doctest::Approx(1.0));
  CHECK(pe[0] > 0);
  CHECK_THROWS_AS(average_invariant(m, Eigen::VectorXd::Zero(3)), Error);
}

TEST_CASE("sphere parity under the equatorial reflection") {
  const auto s = round_sphere(2);
  const auto [even, odd] = parity_split_spectrum(s, "tau", 4, ProblemKind::Laplace);
  CHECK(even.zero_modes == 1);
  CHECK(odd.zero_modes == 0);
  const double l1 = laplace_spectrum(s, 3).first_nonzero();
  // Even: x and y; odd: z.
  CHECK(even.eigenvalues[1] == doctest::Approx(l1).epsilon(1e-6));
  CHECK(even.eigenvalues[2] == doctest::Approx(l1).epsilon(1e-6));
  CHECK(even.eigenvalues[3] > 2 * l1);
  CHECK(odd.eigenvalues[0] == doctest::Approx(l1).epsilon(1e-6));
  CHECK(odd.eigenvalues[1] > 2 * l1);
  const auto full = laplace_spectrum(s, 7);
  const auto both = merged(even, odd, 8);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(both[i] - full.eigenvalues[i]) <= 1e-7 * std::max(1.0, full.eigenvalues[i]));
  const auto cp = invariant_multiplicity(full, s, 1, "tau");
  CHECK(cp.dimension == 3);
  CHECK(cp.even == 2);
  CHECK(cp.odd == 1);
  CHECK(cp.mixed == 0);
}

TEST_CASE("torus odd sector under x reflection contains sin(2 pi x)") {
  const int level = 2;
  const auto t = flat_square_torus(level);
  const int nx = 8 << level;
  const auto [even, odd] = parity_split_spectrum(t, "rx", 3, ProblemKind::Laplace);
  CHECK(odd.eigenvalues[0] == doctest::Approx(4 * kPi * kPi).epsilon(0.02));
  CHECK(odd.eigenvalues[1] > 1.5 * odd.eigenvalues[0]);
  CHECK(even.eigenvalues[1] == doctest::Approx(odd.eigenvalues[0]).epsilon(1e-3));
  CHECK(even.eigenvalues[3] == doctest::Approx(odd.eigenvalues[0]).epsilon(1e-3));
  Eigen::VectorXd s(t.num_vertices());
  for (int v = 0; v < t.num_vertices(); ++v) s[v] = std::sin(2 * kPi * (v % nx) / nx);
  const Eigen::VectorXd w = mass_diagonal(t);
  const Eigen::VectorXd u = odd.eigenvectors.col(0);
  const double c = (u.array() * w.array() * s.array()).sum() /
                   std::sqrt((u.array().square() * w.array()).sum() * (s.array().square() * w.array()).sum());
  CHECK(std::abs(c) > 0.999);
  const auto full = laplace_spectrum(t, 4);
  const auto cp = invariant_multiplicity(full, t, 1, "rx");
  CHECK(cp.dimension == 4);
  CHECK(cp.even == 3);
  CHECK(cp.odd == 1);
}

TEST_CASE("half mesh and projection agree") {
  const auto m = klein_genus_two();
  for (const auto& names : {std::vector<std::string>{"tau"}, std::vector<std::string>{"r1"},
                            std::vector<std::string>{"tau", "r1"}}) {
    for (const auto& label : ParityLabel::all(names)) {
      CAPTURE(label.sign_string());
      REQUIRE(half_mesh(m, label, BoundaryConditionMap{}).has_value());
      const auto a = labeled_spectrum(m, label, {}, 4, {}, ReductionRoute::Projection);
      const auto b = labeled_spectrum(m, label, {}, 4, {}, ReductionRoute::HalfMesh);
      REQUIRE(a.size() == b.size());
      CHECK(a.zero_modes == b.zero_modes);
      for (int i = 0; i < a.size(); ++i)
        CHECK(std::abs(a.eigenvalues[i] - b.eigenvalues[i]) <= 1e-6 * std::max(1.0, a.eigenvalues[i]));
    }
  }
}

TEST_CASE("sector counts add up to the full spectrum") {
  const auto m = klein_genus_two();
  const auto full = laplace_spectrum(m, 12);
  const double cap = full.eigenvalues[8] * 0.999;
  int total = 0;
  for (const auto& label : ParityLabel::all({"tau", "r1"})) {
    const auto sp = labeled_spectrum(m, label, {}, 10);
    total += static_cast<int>(std::count_if(sp.eigenvalues.begin(), sp.eigenvalues.end(), [&](double x) { return x <= cap; }));
  }
  CHECK(total == static_cast<int>(std::count_if(full.eigenvalues.begin(), full.eigenvalues.end(),
                                                [&](double x) { return x <= cap; })));
}

TEST_CASE("labeled first eigenvalues") {
  // All-even on the trivial group is the plain problem.
  const auto d = unit_disk(2);
  auto plain = d;
  plain.action = GroupAction::trivial(d.num_vertices());
  CHECK_THROWS_AS(labeled_first(plain, ParityLabel::make({"rx"}, "+"), ProblemKind::Steklov), Error);
  CHECK(labeled_first(d, ParityLabel{}, ProblemKind::Steklov) ==
        doctest::Approx(steklov_spectrum(d, 1).first_nonzero()).epsilon(1e-10));
  // A D2-symmetric disk: the fully even sector starts at sigma_2 = 2, above the global sigma_1.
  const double s_pp = labeled_first(d, ParityLabel::make({"rx", "ry"}, "++"), ProblemKind::Steklov);
  CHECK(s_pp == doctest::Approx(2.0).epsilon(0.01));
  CHECK(s_pp >= steklov_spectrum(d, 1).first_nonzero());
  CHECK(labeled_first(d, ParityLabel::make({"rx", "ry"}, "-+"), ProblemKind::Steklov) ==
        doctest::Approx(1.0).epsilon(0.01));
  // Hemisphere: the tau-odd sector is the Dirichlet problem on a half sphere, first eigenvalue 2.
  const auto s = round_sphere(3);
  const double odd = labeled_first(s, ParityLabel::make({"tau"}, "-"), ProblemKind::Laplace);
  CHECK(odd * area(s) / 2 == doctest::Approx(4 * kPi).epsilon(0.01));
}

TEST_CASE("label errors") {
  const auto s = round_sphere(1);
  CHECK_THROWS_AS(check_label(s, ParityLabel::make({"nope"}, "+")), Error);
  try {
    check_label(s, ParityLabel::make({"rx*ry*tau"}, "+"));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotInvolution);
  }
  TypeB b;
  b.vij(1, 2) = 2;
  const auto c = chamber_mesh(dihedral_star(3), b, 0.2);
  const auto m = reflect_assemble(c, full_assembly(c.group));
  try {
    check_label(m, ParityLabel::make({"r1", "r2"}, "++"));
    FAIL("expected NonCommuting");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonCommuting);
  }
}

TEST_CASE("labeled spectra export") {
  const auto m = klein_genus_two();
  const auto j = labeled_spectra_json(m, {"tau", "r1"}, ProblemKind::Laplace, 3);
  CHECK(j.size() == 4);
  CHECK(j.contains("++"));
  CHECK(j.contains("--"));
  CHECK(j["++"]["zero_modes"] == 1);
  CHECK(j["-+"]["zero_modes"] == 0);
}
