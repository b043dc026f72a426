#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "eigenmax/error.hpp"
#include "eigenmax/mesh.hpp"

using namespace eigenmax;
constexpr double kPi = std::numbers::pi;

namespace {
// Chambers are permuted freely and transitively by the action.
void check_chamber_action(const SymmetricMesh& m, int copies) {
  std::set<int> labels(m.triangle_chamber.begin(), m.triangle_chamber.end());
  CHECK(static_cast<int>(labels.size()) == copies);
  CHECK(m.action.size() == copies);
  std::map<std::array<int, 3>, int> tri_chamber;
  for (int t = 0; t < m.num_triangles(); ++t) {
    auto s = m.triangles[t];
    std::sort(s.begin(), s.end());
    tri_chamber[s] = m.triangle_chamber[t];
  }
  // Pick one triangle of chamber 0 and follow its images.
  int t0 = 0;
  while (m.triangle_chamber[t0] != 0) ++t0;
  std::set<int> hit;
  for (int g = 0; g < m.action.size(); ++g) {
    const auto& p = m.action.perms[g];
    std::array<int, 3> s{p[m.triangles[t0][0]], p[m.triangles[t0][1]], p[m.triangles[t0][2]]};
    std::sort(s.begin(), s.end());
    hit.insert(tri_chamber.at(s));
  }
  CHECK(static_cast<int>(hit.size()) == copies);
}
}  // namespace

TEST_CASE("icosphere counts, area and symmetry") {
  for (int n = 0; n <= 4; ++n) {
    const auto m = round_sphere(n);
    CHECK(m.num_vertices() == 10 * (1 << (2 * n)) + 2);
    CHECK(euler_characteristic(m) == 2);
    CHECK(validate_mesh(m).ok);
    CHECK(m.action.size() == 8);
  }
  const auto m3 = round_sphere(3);
  CHECK(m3.num_vertices() == 642);
  const double err3 = std::abs(area(m3) - 4 * kPi), err4 = std::abs(area(round_sphere(4)) - 4 * kPi);
  CHECK(err4 < err3);
  CHECK(err4 / (4 * kPi) < 0.005);
}

TEST_CASE("flat tori") {
  for (double aspect : {1.0, 0.5, 1.5}) {
    const auto m = flat_torus(aspect, 1);
    CHECK(euler_characteristic(m) == 0);
    CHECK(m.boundary.empty());
    CHECK(validate_mesh(m).ok);
    CHECK(area(m) == doctest::Approx(aspect).epsilon(1e-12));
    CHECK(closed_genus(m) == 1);
  }
  CHECK(area(flat_square_torus(2)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unit disk") {
  double prev = 1e9;
  for (int n = 0; n <= 3; ++n) {
    const auto m = unit_disk(n);
    CHECK(validate_mesh(m).ok);
    CHECK(euler_characteristic(m) == 1);
    CHECK(boundary_loop_count(m) == 1);
    const double err = std::abs(boundary_length(m) - 2 * kPi);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev / (2 * kPi) < 1e-3);
  // Triangles tile the disk: total area equals the polygon area.
  const int R = 6;
  const auto m = unit_disk_rings(R);
  const double polygon = 0.5 * 6 * R * std::sin(2 * kPi / (6 * R));
  CHECK(area(m) == doctest::Approx(polygon).epsilon(1e-12));
  CHECK(min_angle_degrees(m) > 20.0);
}

TEST_CASE("cylinder and annulus") {
  const auto c = flat_cylinder(1.0, 1);
  CHECK(validate_mesh(c).ok);
  CHECK(euler_characteristic(c) == 0);
  CHECK(boundary_loop_count(c) == 2);
  CHECK(area(c) == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(boundary_length(c, {PanelLabel{PanelLabel::Outer, 0}}) == doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(boundary_length(c, {PanelLabel{PanelLabel::Free, 0}}) == doctest::Approx(2 * kPi).epsilon(1e-12));
  const auto a = conformal_annulus(0.8, 1);
  CHECK(validate_mesh(a).ok);
  CHECK(a.action.size() == 8);
  CHECK(area(a) == doctest::Approx(2 * kPi * 1.6).epsilon(1e-12));
  CHECK(boundary_length(a) == doctest::Approx(4 * kPi).epsilon(1e-12));
}

TEST_CASE("builtin parser") {
  CHECK(builtin("sphere:2").num_vertices() == 162);
  CHECK(builtin("builtin:disk:1").num_vertices() == unit_disk(1).num_vertices());
  CHECK(area(builtin("torus:aspect=2:0")) == doctest::Approx(2.0));
  CHECK(builtin("cylinder:L=2:0").descriptor["L"] == 2.0);
  CHECK_THROWS_AS(builtin("cube:2"), Error);
}

TEST_CASE("density scaling and guards") {
  const auto d = unit_disk(1);
  std::vector<double> two(d.num_vertices(), 2.0);
  const auto d2 = set_density(d, two);
  CHECK(area(d2) == doctest::Approx(2 * area(d)).epsilon(1e-14));
  CHECK(boundary_length(d2) == doctest::Approx(std::sqrt(2.0) * boundary_length(d)).epsilon(1e-14));
  std::vector<double> bad(d.num_vertices(), 1.0);
  bad[1] = 0.0;
  try {
    set_density(d, bad);
    FAIL("expected NonPositiveDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveDensity);
  }
  bad[1] = 1.5;  // ring 1 vertex, moved by the reflections
  try {
    set_density(d, bad);
    FAIL("expected NonInvariantDensity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonInvariantDensity);
  }
}

TEST_CASE("area is invariant under relabeling by the action") {
  const auto s = round_sphere(2);
  std::vector<double> rho(s.num_vertices());
  for (int v = 0; v < s.num_vertices(); ++v) rho[v] = 1.0 + s.positions[v].z() * s.positions[v].z();
  const auto m = set_density(s, rho);
  for (const auto& p : s.action.perms) {
    std::vector<double> moved(rho.size());
    for (int v = 0; v < s.num_vertices(); ++v) moved[p[v]] = rho[v];
    CHECK(area(set_density(s, moved)) == doctest::Approx(area(m)).epsilon(1e-14));
  }
}

TEST_CASE("chamber meshes") {
  SUBCASE("hemisphere for M(1)") {
    const auto c = chamber_mesh_ma(1, 0.2);
    CHECK(euler_characteristic(c.mesh) == 1);
    CHECK(boundary_loop_count(c.mesh) == 1);
    const auto m = reflect_assemble(c, full_assembly(c.group));
    CHECK(closed_genus(m) == 0);
    CHECK(euler_characteristic(m) == 2);
    check_chamber_action(m, 2);
    CHECK(validate_mesh(m).ok);
    CHECK(area(m) == doctest::Approx(4 * kPi).epsilon(0.01));
  }
  SUBCASE("Z2 with 1 + r1 is a half-disk with one hole") {
    TypeB b;
    b.f = 1;
    b.ei(1) = 1;
    const auto c = chamber_mesh(one_star(), b, 0.15);
    CHECK(boundary_loop_count(c.mesh) == 2);
    CHECK(euler_characteristic(c.mesh) == 0);
    const auto m = reflect_assemble(c, full_assembly(c.group));
    CHECK(closed_genus(m) == 2);
    CHECK(genus_of_type(one_star(), b) == 2);
    check_chamber_action(m, 4);
    CHECK(validate_mesh(m).ok);
    // every chamber edge on a glued mirror has all its vertices fixed
    for (int v = 0; v < c.mesh.num_vertices(); ++v)
      if (c.fixed_mask[v] & FixRho1) CHECK(std::abs(c.mesh.positions[v].x()) < 1e-12);
  }
  SUBCASE("dihedral digon with one corner-to-corner tau edge") {
    TypeB b;
    b.vij(1, 2) = 1;
    const auto c = chamber_mesh(dihedral_star(3), b, 0.15);
    CHECK(boundary_loop_count(c.mesh) == 1);
    std::set<int> kinds;
    for (const auto& be : c.mesh.boundary) kinds.insert(static_cast<int>(be.label.kind) * 10 + be.label.index);
    CHECK(kinds.size() == 3);
  }
  SUBCASE("D_k with 2 r1r2 gives a torus") {
    for (int k = 2; k <= 5; ++k) {
      TypeB b;
      b.vij(1, 2) = 2;
      const auto c = chamber_mesh(dihedral_star(k), b, 0.12);
      const auto m = reflect_assemble(c, full_assembly(c.group));
      CHECK(closed_genus(m) == 1);
      check_chamber_action(m, 4 * k);
      CHECK(validate_mesh(m).ok);
    }
  }
}

TEST_CASE("assembled genus matches genus_of_type") {
  struct Case {
    ReflectionGroup G;
    TypeB b;
  };
  std::vector<Case> cases;
  auto type = [](int f, std::array<int, 3> e, std::array<int, 3> v) {
    TypeB b;
    b.f = f;
    b.e = e;
    b.v = v;
    return b;
  };
  cases.push_back({one_star(), type(2, {0, 0, 0}, {0, 0, 0})});
  cases.push_back({one_star(), type(0, {3, 0, 0}, {0, 0, 0})});
  cases.push_back({dihedral_star(2), type(0, {1, 1, 0}, {0, 0, 0})});
  cases.push_back({dihedral_star(4), type(1, {0, 0, 0}, {1, 0, 0})});
  cases.push_back({platonic(2, 3, 3), type(0, {0, 0, 0}, {0, 0, 1})});
  cases.push_back({platonic(2, 3, 4), type(0, {1, 0, 0}, {0, 0, 0})});
  cases.push_back({platonic(2, 3, 5), type(0, {0, 0, 0}, {1, 0, 0})});
  cases.push_back({platonic(2, 2, 3), type(1, {0, 0, 0}, {0, 0, 0})});
  for (const auto& c : cases) {
    CAPTURE(c.G.name());
    CAPTURE(c.b.str());
    const auto ch = chamber_mesh(c.G, c.b, 0.12);
    const auto m = reflect_assemble(ch, full_assembly(c.G));
    CHECK(closed_genus(m) == genus_of_type(c.G, c.b));
    CHECK(euler_characteristic(m) == 2 - 2 * genus_of_type(c.G, c.b));
    check_chamber_action(m, 2 * group_order(c.G));
    CHECK(validate_mesh(m).ok);
    CHECK(min_angle_degrees(m) >= 1.0);
  }
}

TEST_CASE("bounded families") {
  TypeB b;
  b.f = 1;
  b.ei(1) = 1;
  const auto ntau = descriptor_mesh(SurfaceDescriptor::bounded_tau(one_star(), b), 800);
  const auto bt = boundary_topology(SurfaceDescriptor::bounded_tau(one_star(), b));
  CHECK(boundary_loop_count(ntau) == bt.boundary_components);
  CHECK(closed_genus(ntau) == bt.genus);
  const auto nr = descriptor_mesh(SurfaceDescriptor::bounded_rho1(one_star(), b), 800);
  const auto br = boundary_topology(SurfaceDescriptor::bounded_rho1(one_star(), b));
  CHECK(boundary_loop_count(nr) == br.boundary_components);
  CHECK(closed_genus(nr) == br.genus);
  CHECK(validate_mesh(nr).ok);
}

TEST_CASE("descriptor meshes reach the target size") {
  const auto m = descriptor_mesh(SurfaceDescriptor::closed_a(1), 3000);
  CHECK(m.num_vertices() >= 3000);
  CHECK(m.num_vertices() < 4500);
  CHECK(closed_genus(m) == 0);
  const auto m3 = descriptor_mesh(SurfaceDescriptor::closed_a(3), 1500);
  CHECK(closed_genus(m3) == 2);
}

TEST_CASE("json round trip") {
  const auto c = flat_cylinder(1.0, 0);
  const auto back = mesh_from_json(mesh_to_json(c));
  CHECK(back.num_vertices() == c.num_vertices());
  CHECK(back.num_triangles() == c.num_triangles());
  CHECK(back.action.size() == c.action.size());
  CHECK(area(back) == doctest::Approx(area(c)).epsilon(1e-14));
  CHECK(boundary_length(back, {PanelLabel{PanelLabel::Free, 0}}) ==
        doctest::Approx(boundary_length(c, {PanelLabel{PanelLabel::Free, 0}})));
  CHECK_THROWS_AS(mesh_from_json(nlohmann::json{{"positions", 3}}), Error);
}

TEST_CASE("assembly genus over small types") {
  std::vector<ReflectionGroup> groups{one_star(), dihedral_star(2), dihedral_star(3), dihedral_star(6),
                                      platonic(2, 2, 2), platonic(2, 2, 4), platonic(2, 3, 3)};
  int built = 0;
  for (const auto& G : groups) {
    const int n = G.rank();
    // f, e_i in {0,1}, v_ij in {0,1}: every combination with integer genus.
    const int slots = 1 + n + (n == 3 ? 3 : n == 2 ? 1 : 0);
    for (int bits = 1; bits < (1 << slots); ++bits) {
      TypeB b;
      int s = 0;
      b.f = (bits >> s++) & 1;
      for (int i = 1; i <= n; ++i) b.ei(i) = (bits >> s++) & 1;
      if (n == 2) b.vij(1, 2) = (bits >> s++) & 1;
      if (n == 3)
        for (auto [i, j] : {std::pair{1, 2}, {1, 3}, {2, 3}}) b.vij(i, j) = (bits >> s++) & 1;
      int genus;
      try {
        genus = genus_of_type(G, b);
      } catch (const Error&) {
        continue;
      }
      CAPTURE(G.name());
      CAPTURE(b.str());
      const auto m = reflect_assemble(chamber_mesh(G, b, 0.2), full_assembly(G));
      CHECK(closed_genus(m) == genus);
      CHECK(is_manifold(m));
      CHECK(is_consistently_oriented(m));
      ++built;
    }
  }
  CHECK(built > 40);
}

namespace {
SymmetricMesh keep_generators(SymmetricMesh m, const std::vector<std::string>& keep) {
  std::vector<std::vector<int>> gens;
  for (const auto& name : keep) gens.push_back(m.action.perms[m.action.find(name)]);
  m.action = GroupAction::generate(m.num_vertices(), keep, gens, std::vector<int>(keep.size(), -1));
  return m;
}

int vertex_near(const SymmetricMesh& m, const Eigen::Vector3d& p) {
  int best = 0;
  for (int v = 1; v < m.num_vertices(); ++v)
    if ((m.positions[v] - p).norm() < (m.positions[best] - p).norm()) best = v;
  return best;
}
}  // namespace

TEST_CASE("two spheres joined by a cylinder") {
  const auto s = keep_generators(round_sphere(2), {"ry", "tau"});
  const int p = vertex_near(s, {1, 0, 0});
  GluedMetricSpec spec;
  spec.eps = 0.05;
  spec.L = 10;
  spec.pairs = {{p, p}};
  const auto g = glue_cylinder(s, &s, spec);
  CHECK(closed_genus(g.mesh) == 0);
  CHECK(g.mesh.boundary.empty());
  CHECK(validate_mesh(g.mesh).ok);
  CHECK(g.mesh.action.size() == 4);
  CHECK(area(g.mesh) == doctest::Approx(2 * area(s) - g.excised_area + g.cylinder_area).epsilon(1e-12));
  const double r = g.cylinder_radius[0];
  CHECK(g.cylinder_area == doctest::Approx(2 * kPi * r * spec.L * r).epsilon(0.02));
  // exactly the star of p is removed at this eps
  CHECK(g.mesh.num_vertices() > 2 * s.num_vertices() - 2);
}

TEST_CASE("torus self-gluing gives genus two") {
  const auto t = flat_square_torus(1);
  const int N = 16;
  GluedMetricSpec spec;
  spec.eps = 0.03;
  spec.L = 2;
  spec.pairs = {{0, 8 * N + 8}};
  const auto g = glue_cylinder(t, nullptr, spec);
  CHECK(euler_characteristic(g.mesh) == euler_characteristic(t) - 2);
  CHECK(closed_genus(g.mesh) == 2);
  CHECK(validate_mesh(g.mesh).ok);
  CHECK(g.mesh.action.size() == 4);
}

TEST_CASE("gluing errors") {
  const auto s = keep_generators(round_sphere(2), {"tau"});
  GluedMetricSpec spec;
  spec.eps = 0.05;
  const int p = vertex_near(s, {1, 0, 0});
  int nb = -1;
  for (const auto& e : s.edges)
    if (e[0] == p) nb = e[1];
  spec.pairs = {{p, nb}};
  try {
    glue_cylinder(s, nullptr, spec);
    FAIL("expected OverlappingDisks");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverlappingDisks);
  }
  // An original icosahedron vertex has five neighbours, a midpoint vertex six.
  const int five = 0;
  spec.pairs = {{p, five}};
  try {
    glue_cylinder(s, &s, spec);
    FAIL("expected GluingMismatch");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::GluingMismatch || e.code() == ErrorCode::NonEquivariantPairing));
  }
  // rx moves (1,0,0) off the pairing.
  const auto full = round_sphere(2);
  spec.pairs = {{p, p}};
  try {
    glue_cylinder(full, &full, spec);
    FAIL("expected NonEquivariantPairing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonEquivariantPairing);
  }
}
