#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "eigenmax/error.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

namespace {
constexpr double kPi = std::numbers::pi;

void attach_reflections(SymmetricMesh& m, const std::vector<std::string>& names,
                        const std::vector<std::vector<int>>& perms) {
  m.action = GroupAction::generate(m.num_vertices(), names, perms, std::vector<int>(perms.size(), -1));
}

// Structured periodic grid with alternating diagonals. Cell (i, j) spans
// columns i..i+1 (mod nx) and rows j..j+1 (mod rows).
void grid_triangles(SymmetricMesh& m, int nx, int ny_cells, int rows) {
  auto id = [&](int i, int j) { return ((j % rows + rows) % rows) * nx + ((i % nx + nx) % nx); };
  for (int j = 0; j < ny_cells; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
      } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
      }
    }
}

// Flat lengths from per-vertex parameter coordinates with optional periods.
void flat_lengths(SymmetricMesh& m, const std::vector<Eigen::Vector2d>& uv, double px, double py) {
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    Eigen::Vector2d d = uv[m.edges[e][1]] - uv[m.edges[e][0]];
    if (px > 0) d.x() -= px * std::round(d.x() / px);
    if (py > 0) d.y() -= py * std::round(d.y() / py);
    m.edge_length[e] = d.norm();
  }
}

int level_count(int base, int level) {
  if (level < 0) throw Error(ErrorCode::InfeasibleResolution, "refinement level must be >= 0");
  return base << level;
}
}  // namespace

SymmetricMesh round_sphere(int level) {
  if (level < 0) throw Error(ErrorCode::InfeasibleResolution, "refinement level must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  SymmetricMesh m;
  const double base[12][3] = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                              {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (const auto& p : base) m.positions.push_back(Eigen::Vector3d(p[0], p[1], p[2]).normalized());
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int id = m.num_vertices();
      m.positions.push_back((m.positions[a] + m.positions[b]).normalized());
      mid[key] = id;
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& t : m.triangles) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    m.triangles = std::move(next);
  }
  finalize_mesh(m);
  // Reflected coordinates are exact negations, so rounded hashing is exact.
  auto key = [](const Eigen::Vector3d& p) {
    return std::array<long long, 3>{std::llround(p.x() * 1e8), std::llround(p.y() * 1e8), std::llround(p.z() * 1e8)};
  };
  std::map<std::array<long long, 3>, int> index;
  for (int v = 0; v < m.num_vertices(); ++v) index[key(m.positions[v])] = v;
  std::vector<std::vector<int>> perms(3, std::vector<int>(m.num_vertices()));
  for (int axis = 0; axis < 3; ++axis)
    for (int v = 0; v < m.num_vertices(); ++v) {
      Eigen::Vector3d p = m.positions[v];
      p[axis] = -p[axis];
      perms[axis][v] = index.at(key(p));
    }
  attach_reflections(m, {"rx", "ry", "tau"}, perms);
  m.descriptor = {{"builtin", "sphere"}, {"level", level}};
  return m;
}

SymmetricMesh flat_torus(double aspect, int level) {
  if (!(aspect > 0)) throw Error(ErrorCode::InfeasibleResolution, "torus aspect must be positive");
  const int nx = level_count(8, level);
  int ny = std::max(2, static_cast<int>(std::lround(nx * aspect)));
  if (ny % 2) ++ny;
  SymmetricMesh m;
  std::vector<Eigen::Vector2d> uv;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double u = static_cast<double>(i) / nx, v = aspect * j / ny;
      uv.emplace_back(u, v);
      const double a = 2 * kPi * u, b = 2 * kPi * j / ny;
      m.positions.emplace_back((2 + std::cos(b)) * std::cos(a), (2 + std::cos(b)) * std::sin(a), std::sin(b));
    }
  grid_triangles(m, nx, ny, ny);
  finalize_mesh(m);
  flat_lengths(m, uv, 1.0, aspect);
  std::vector<std::vector<int>> perms(2, std::vector<int>(m.num_vertices()));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      perms[0][j * nx + i] = j * nx + (nx - i) % nx;
      perms[1][j * nx + i] = ((ny - j) % ny) * nx + i;
    }
  attach_reflections(m, {"rx", "ry"}, perms);
  m.descriptor = {{"builtin", "torus"}, {"aspect", aspect}, {"level", level}};
  return m;
}

SymmetricMesh flat_square_torus(int level) { return flat_torus(1.0, level); }

SymmetricMesh unit_disk_rings(int R) {
  if (R < 1) throw Error(ErrorCode::InfeasibleResolution, "disk needs at least one ring");
  SymmetricMesh m;
  std::vector<int> start(R + 1);
  m.positions.emplace_back(0, 0, 0);
  start[0] = 0;
  for (int j = 1; j <= R; ++j) {
    start[j] = m.num_vertices();
    for (int k = 0; k < 6 * j; ++k) {
      const double th = 2 * kPi * k / (6 * j);
      m.positions.emplace_back(static_cast<double>(j) / R * std::cos(th), static_cast<double>(j) / R * std::sin(th), 0);
    }
  }
  auto at = [&](int j, int k) {
    if (j == 0) return 0;
    const int n = 6 * j;
    return start[j] + ((k % n) + n) % n;
  };
  for (int j = 1; j <= R; ++j) {
    const int i = j - 1;
    // Outer interval k joins the inner vertex nearest its mid-angle (no ties occur).
    for (int k = 0; k < 6 * j; ++k) {
      const int l = i == 0 ? 0 : ((2 * k + 1) * i + j) / (2 * j);
      m.triangles.push_back({at(j, k), at(j, k + 1), at(i, l)});
    }
    for (int k = 0; k < 6 * i; ++k) {
      const int l = ((2 * k + 1) * j + i) / (2 * i);
      m.triangles.push_back({at(i, k + 1), at(i, k), at(j, l)});
    }
  }
  finalize_mesh(m);
  std::vector<std::vector<int>> perms(2, std::vector<int>(m.num_vertices()));
  perms[0][0] = perms[1][0] = 0;
  for (int j = 1; j <= R; ++j)
    for (int k = 0; k < 6 * j; ++k) {
      perms[0][at(j, k)] = at(j, 3 * j - k);
      perms[1][at(j, k)] = at(j, -k);
    }
  attach_reflections(m, {"rx", "ry"}, perms);
  m.descriptor = {{"builtin", "disk"}, {"rings", R}};
  return m;
}

SymmetricMesh unit_disk(int level) {
  SymmetricMesh m = unit_disk_rings(level_count(3, level));
  m.descriptor = {{"builtin", "disk"}, {"level", level}};
  return m;
}

namespace {
// S^1 x [t0, t1] with m columns and `rows` intervals; labels for the two ends.
SymmetricMesh cylinder_grid(int m_around, int rows, double t0, double t1, PanelLabel bottom, PanelLabel top) {
  if (m_around < 4 || m_around % 2) throw Error(ErrorCode::InfeasibleResolution, "cylinder needs an even count >= 4");
  SymmetricMesh m;
  std::vector<Eigen::Vector2d> uv;
  for (int j = 0; j <= rows; ++j)
    for (int i = 0; i < m_around; ++i) {
      const double th = 2 * kPi * i / m_around, t = t0 + (t1 - t0) * j / rows;
      uv.emplace_back(th, t);
      m.positions.emplace_back(std::cos(th), std::sin(th), t);
    }
  grid_triangles(m, m_around, rows, rows + 1);
  finalize_mesh(m);
  flat_lengths(m, uv, 2 * kPi, 0.0);
  const int top_start = rows * m_around;
  relabel_boundary(m, [&](int a, int) { return a >= top_start ? top : bottom; });
  std::vector<std::vector<int>> perms(2, std::vector<int>(m.num_vertices()));
  for (int j = 0; j <= rows; ++j)
    for (int i = 0; i < m_around; ++i) {
      perms[0][j * m_around + i] = j * m_around + ((m_around / 2 - i) % m_around + m_around) % m_around;
      perms[1][j * m_around + i] = j * m_around + (m_around - i) % m_around;
    }
  attach_reflections(m, {"rx", "ry"}, perms);
  return m;
}
}  // namespace

SymmetricMesh flat_cylinder_m(double L, int m_around) {
  if (!(L > 0)) throw Error(ErrorCode::InfeasibleResolution, "cylinder length must be positive");
  const int rows = std::max(1, static_cast<int>(std::ceil(m_around * L / (2 * kPi) - 1e-9)));
  SymmetricMesh m = cylinder_grid(m_around, rows, 0.0, L, {PanelLabel::Free, 0}, {PanelLabel::Outer, 0});
  m.descriptor = {{"builtin", "cylinder"}, {"L", L}, {"m", m_around}};
  return m;
}

SymmetricMesh flat_cylinder(double L, int level) {
  SymmetricMesh m = flat_cylinder_m(L, level_count(8, level));
  m.descriptor = {{"builtin", "cylinder"}, {"L", L}, {"level", level}};
  return m;
}

SymmetricMesh conformal_annulus_m(double T, int m_around) {
  if (!(T > 0)) throw Error(ErrorCode::InfeasibleResolution, "annulus half-length must be positive");
  int rows = std::max(2, static_cast<int>(std::ceil(m_around * 2 * T / (2 * kPi) - 1e-9)));
  if (rows % 2) ++rows;
  SymmetricMesh m = cylinder_grid(m_around, rows, -T, T, {PanelLabel::Outer, 0}, {PanelLabel::Outer, 0});
  auto perms = m.action.perms;
  std::vector<std::vector<int>> gens{perms[m.action.generator_element[0]], perms[m.action.generator_element[1]]};
  std::vector<int> tau(m.num_vertices());
  for (int j = 0; j <= rows; ++j)
    for (int i = 0; i < m_around; ++i) tau[j * m_around + i] = (rows - j) * m_around + i;
  gens.push_back(tau);
  attach_reflections(m, {"rx", "ry", "tau"}, gens);
  m.descriptor = {{"builtin", "annulus"}, {"T", T}, {"m", m_around}};
  return m;
}

SymmetricMesh conformal_annulus(double T, int level) {
  SymmetricMesh m = conformal_annulus_m(T, level_count(8, level));
  m.descriptor = {{"builtin", "annulus"}, {"T", T}, {"level", level}};
  return m;
}

SymmetricMesh builtin(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (!parts.empty() && parts[0] == "builtin") parts.erase(parts.begin());
  if (parts.empty()) throw Error(ErrorCode::ParseError, "empty builtin name");
  const std::string name = parts[0];
  std::map<std::string, double> params;
  int level = 3;
  try {
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto eq = parts[i].find('=');
      if (eq == std::string::npos)
        level = std::stoi(parts[i]);
      else
        params[parts[i].substr(0, eq)] = std::stod(parts[i].substr(eq + 1));
    }
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad builtin parameters in '" + spec + "'");
  }
  auto get = [&](const std::string& k, double d) { return params.count(k) ? params[k] : d; };
  if (name == "sphere") return round_sphere(level);
  if (name == "torus") return flat_torus(get("aspect", 1.0), level);
  if (name == "disk") return unit_disk(level);
  if (name == "cylinder") return flat_cylinder(get("L", 1.0), level);
  if (name == "annulus") return conformal_annulus(get("T", 1.0), level);
  throw Error(ErrorCode::ParseError, "unknown builtin '" + name + "'");
}

}  // namespace eigenmax
