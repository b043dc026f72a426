#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include "eigenmax/error.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

namespace {
long long edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<long long>(a) << 32) | static_cast<unsigned>(b);
}
}  // namespace

std::string PanelLabel::str() const {
  switch (kind) {
    case Outer: return "outer";
    case Mirror: return "mirror:" + std::to_string(index);
    case MirrorTau: return "mirror:tau";
    case Free: return "free";
  }
  return "?";
}

PanelLabel PanelLabel::parse(const std::string& s) {
  if (s == "outer") return {Outer, 0};
  if (s == "free") return {Free, 0};
  if (s == "mirror:tau") return {MirrorTau, 0};
  if (s.rfind("mirror:", 0) == 0) return {Mirror, std::stoi(s.substr(7))};
  throw Error(ErrorCode::ParseError, "unknown panel label '" + s + "'");
}

int GroupAction::find(const std::string& name) const {
  for (std::size_t g = 0; g < generator_names.size(); ++g)
    if (generator_names[g] == name) return generator_element[g];
  for (std::size_t e = 0; e < element_names.size(); ++e)
    if (element_names[e] == name) return static_cast<int>(e);
  return -1;
}

GroupAction GroupAction::trivial(int n) {
  GroupAction a;
  std::vector<int> id(n);
  for (int i = 0; i < n; ++i) id[i] = i;
  a.perms.push_back(id);
  a.parity.push_back(1);
  a.element_names.push_back("e");
  return a;
}

GroupAction GroupAction::generate(int n, const std::vector<std::string>& names,
                                  const std::vector<std::vector<int>>& gens, const std::vector<int>& gen_parity) {
  GroupAction a = trivial(n);
  a.generator_names = names;
  std::map<std::vector<int>, int> seen{{a.perms[0], 0}};
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    for (std::size_t g = 0; g < gens.size(); ++g) {
      // (g * cur)(v) = g(cur(v))
      std::vector<int> p(n);
      for (int v = 0; v < n; ++v) p[v] = gens[g][a.perms[cur][v]];
      if (seen.count(p)) continue;
      const int id = a.size();
      seen[p] = id;
      a.perms.push_back(std::move(p));
      a.parity.push_back(a.parity[cur] * gen_parity[g]);
      a.element_names.push_back(cur == 0 ? names[g] : names[g] + "*" + a.element_names[cur]);
      queue.push_back(id);
    }
  }
  for (const auto& g : gens) a.generator_element.push_back(seen.at(g));
  for (std::size_t g = 0; g < gens.size(); ++g) a.element_names[a.generator_element[g]] = names[g];
  return a;
}

int SymmetricMesh::edge_index(int a, int b) const {
  auto it = edge_lookup.find(edge_key(a, b));
  return it == edge_lookup.end() ? -1 : it->second;
}

std::array<double, 3> SymmetricMesh::triangle_lengths(int t) const {
  return {edge_length[tri_edges[t][0]], edge_length[tri_edges[t][1]], edge_length[tri_edges[t][2]]};
}

double SymmetricMesh::triangle_area(int t) const {
  auto l = triangle_lengths(t);
  std::sort(l.begin(), l.end(), std::greater<double>());
  const double a = l[0], b = l[1], c = l[2];
  // Kahan's stable Heron formula
  const double q = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return q > 0 ? 0.25 * std::sqrt(q) : 0.0;
}

void finalize_mesh(SymmetricMesh& m) {
  const std::vector<double> old_lengths = m.edge_length;
  const auto old_edges = m.edges;
  std::unordered_map<long long, double> given;
  for (std::size_t e = 0; e < old_edges.size() && e < old_lengths.size(); ++e)
    given[edge_key(old_edges[e][0], old_edges[e][1])] = old_lengths[e];

  m.edges.clear();
  m.edge_lookup.clear();
  m.tri_edges.assign(m.triangles.size(), {0, 0, 0});
  std::vector<int> count;
  std::vector<std::array<int, 2>> first_dir;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = m.triangles[t][(k + 1) % 3], b = m.triangles[t][(k + 2) % 3];
      const long long key = edge_key(a, b);
      auto it = m.edge_lookup.find(key);
      int id;
      if (it == m.edge_lookup.end()) {
        id = static_cast<int>(m.edges.size());
        m.edge_lookup[key] = id;
        m.edges.push_back({std::min(a, b), std::max(a, b)});
        count.push_back(0);
        first_dir.push_back({a, b});
      } else {
        id = it->second;
      }
      ++count[id];
      m.tri_edges[t][k] = id;
    }
  }
  m.edge_length.assign(m.edges.size(), 0.0);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    auto it = given.find(edge_key(m.edges[e][0], m.edges[e][1]));
    m.edge_length[e] = it != given.end() ? it->second
                                         : (m.positions[m.edges[e][0]] - m.positions[m.edges[e][1]]).norm();
  }
  std::map<long long, PanelLabel> old_labels;
  for (const auto& be : m.boundary) old_labels[edge_key(be.a, be.b)] = be.label;
  m.boundary.clear();
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    if (count[e] != 1) continue;
    BoundaryEdge be;
    be.a = first_dir[e][0];
    be.b = first_dir[e][1];
    auto it = old_labels.find(edge_key(be.a, be.b));
    if (it != old_labels.end()) be.label = it->second;
    m.boundary.push_back(be);
  }
  if (m.density.size() != m.positions.size()) m.density.assign(m.positions.size(), 1.0);
  if (m.action.perms.empty() || static_cast<int>(m.action.perms[0].size()) != m.num_vertices())
    m.action = GroupAction::trivial(m.num_vertices());
}

void set_edge_lengths_from_positions(SymmetricMesh& m) {
  for (std::size_t e = 0; e < m.edges.size(); ++e)
    m.edge_length[e] = (m.positions[m.edges[e][0]] - m.positions[m.edges[e][1]]).norm();
}

void relabel_boundary(SymmetricMesh& m, const std::function<PanelLabel(int, int)>& label_of) {
  for (auto& be : m.boundary) be.label = label_of(be.a, be.b);
}

double area(const SymmetricMesh& m) {
  double A = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    A += m.triangle_area(t) * (m.density[tri[0]] + m.density[tri[1]] + m.density[tri[2]]) / 3.0;
  }
  return A;
}

double boundary_length(const SymmetricMesh& m) {
  double L = 0.0;
  for (const auto& be : m.boundary) {
    const int e = m.edge_index(be.a, be.b);
    L += m.edge_length[e] * 0.5 * (std::sqrt(m.density[be.a]) + std::sqrt(m.density[be.b]));
  }
  return L;
}

double boundary_length(const SymmetricMesh& m, const std::vector<PanelLabel>& labels) {
  double L = 0.0;
  for (const auto& be : m.boundary) {
    if (std::find(labels.begin(), labels.end(), be.label) == labels.end()) continue;
    const int e = m.edge_index(be.a, be.b);
    L += m.edge_length[e] * 0.5 * (std::sqrt(m.density[be.a]) + std::sqrt(m.density[be.b]));
  }
  return L;
}

bool density_invariant(const SymmetricMesh& m, const std::vector<double>& rho, double rel_tol) {
  double scale = 0.0;
  for (double r : rho) scale = std::max(scale, std::abs(r));
  for (const auto& p : m.action.perms)
    for (int v = 0; v < m.num_vertices(); ++v)
      if (std::abs(rho[p[v]] - rho[v]) > rel_tol * scale) return false;
  return true;
}

SymmetricMesh set_density(const SymmetricMesh& m, const std::vector<double>& rho) {
  if (static_cast<int>(rho.size()) != m.num_vertices())
    throw Error(ErrorCode::DimensionMismatch, "density size differs from vertex count");
  for (double r : rho)
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::NonPositiveDensity, "density must be positive");
  if (!density_invariant(m, rho)) throw Error(ErrorCode::NonInvariantDensity, "density is not action-invariant");
  SymmetricMesh out = m;
  out.density = rho;
  return out;
}

int euler_characteristic(const SymmetricMesh& m) {
  return m.num_vertices() - static_cast<int>(m.edges.size()) + m.num_triangles();
}

std::vector<std::vector<int>> boundary_loops(const SymmetricMesh& m) {
  std::unordered_map<int, int> next;
  for (const auto& be : m.boundary) next[be.a] = be.b;
  std::set<int> used;
  std::vector<std::vector<int>> loops;
  for (const auto& be : m.boundary) {
    if (used.count(be.a)) continue;
    std::vector<int> loop;
    int v = be.a;
    while (!used.count(v)) {
      used.insert(v);
      loop.push_back(v);
      auto it = next.find(v);
      if (it == next.end()) break;
      v = it->second;
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

int boundary_loop_count(const SymmetricMesh& m) { return static_cast<int>(boundary_loops(m).size()); }

int closed_genus(const SymmetricMesh& m) { return (2 - euler_characteristic(m) - boundary_loop_count(m)) / 2; }

bool is_manifold(const SymmetricMesh& m) {
  std::vector<int> count(m.edges.size(), 0);
  for (const auto& te : m.tri_edges)
    for (int e : te) ++count[e];
  for (int c : count)
    if (c > 2) return false;
  // boundary vertices must have exactly one outgoing boundary edge
  std::unordered_map<int, int> out;
  for (const auto& be : m.boundary)
    if (++out[be.a] > 1) return false;
  return true;
}

bool is_consistently_oriented(const SymmetricMesh& m) {
  std::set<std::pair<int, int>> directed;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k)
      if (!directed.insert({t[k], t[(k + 1) % 3]}).second) return false;
  return true;
}

double min_angle_degrees(const SymmetricMesh& m) {
  double best = 180.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto l = m.triangle_lengths(t);
    for (int k = 0; k < 3; ++k) {
      const double a = l[k], b = l[(k + 1) % 3], c = l[(k + 2) % 3];
      const double cosv = std::clamp((b * b + c * c - a * a) / (2 * b * c), -1.0, 1.0);
      best = std::min(best, std::acos(cosv) * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

MeshCheck validate_mesh(const SymmetricMesh& m) {
  MeshCheck r;
  auto fail = [&](const std::string& s) {
    r.ok = false;
    r.problems.push_back(s);
  };
  if (!is_manifold(m)) fail("not a manifold");
  if (!is_consistently_oriented(m)) fail("inconsistent orientation");
  for (double d : m.density)
    if (!(d > 0)) {
      fail("non-positive density");
      break;
    }
  if (!density_invariant(m, m.density)) fail("density not invariant");
  std::set<std::array<int, 3>> tris;
  for (auto t : m.triangles) {
    std::sort(t.begin(), t.end());
    tris.insert(t);
  }
  for (int g = 0; g < m.action.size(); ++g) {
    const auto& p = m.action.perms[g];
    for (auto t : m.triangles) {
      std::array<int, 3> s{p[t[0]], p[t[1]], p[t[2]]};
      std::sort(s.begin(), s.end());
      if (!tris.count(s)) {
        fail("element " + m.action.element_names[g] + " does not map triangles to triangles");
        break;
      }
    }
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      const int img = m.edge_index(p[m.edges[e][0]], p[m.edges[e][1]]);
      if (img < 0 || std::abs(m.edge_length[img] - m.edge_length[e]) > 1e-9 * m.edge_length[e]) {
        fail("element " + m.action.element_names[g] + " does not preserve edge lengths");
        break;
      }
    }
  }
  return r;
}

nlohmann::json mesh_to_json(const SymmetricMesh& m) {
  nlohmann::json j;
  j["header"] = {{"vertices", m.num_vertices()},
                 {"triangles", m.num_triangles()},
                 {"boundary_edges", m.boundary.size()},
                 {"group_elements", m.action.size()},
                 {"descriptor", m.descriptor}};
  nlohmann::json pos = nlohmann::json::array(), tri = nlohmann::json::array();
  for (const auto& p : m.positions) pos.push_back({p.x(), p.y(), p.z()});
  for (const auto& t : m.triangles) tri.push_back({t[0], t[1], t[2]});
  j["positions"] = pos;
  j["triangles"] = tri;
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < m.edges.size(); ++e) edges.push_back({m.edges[e][0], m.edges[e][1], m.edge_length[e]});
  j["edges"] = edges;
  nlohmann::json bd = nlohmann::json::array();
  for (const auto& be : m.boundary) bd.push_back({be.a, be.b, be.label.str()});
  j["boundary"] = bd;
  j["density"] = m.density;
  nlohmann::json act;
  act["generators"] = m.action.generator_names;
  act["generator_elements"] = m.action.generator_element;
  act["names"] = m.action.element_names;
  act["parity"] = m.action.parity;
  act["perms"] = m.action.perms;
  j["action"] = act;
  if (!m.triangle_chamber.empty()) j["triangle_chamber"] = m.triangle_chamber;
  return j;
}

SymmetricMesh mesh_from_json(const nlohmann::json& j) {
  SymmetricMesh m;
  try {
    for (const auto& p : j.at("positions")) m.positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    for (const auto& t : j.at("triangles")) m.triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    for (const auto& e : j.at("edges")) {
      m.edges.push_back({e[0].get<int>(), e[1].get<int>()});
      m.edge_length.push_back(e[2].get<double>());
    }
    for (const auto& b : j.at("boundary"))
      m.boundary.push_back({b[0].get<int>(), b[1].get<int>(), PanelLabel::parse(b[2].get<std::string>())});
    m.density = j.at("density").get<std::vector<double>>();
    const auto& act = j.at("action");
    m.action.generator_names = act.at("generators").get<std::vector<std::string>>();
    m.action.generator_element = act.at("generator_elements").get<std::vector<int>>();
    m.action.element_names = act.at("names").get<std::vector<std::string>>();
    m.action.parity = act.at("parity").get<std::vector<int>>();
    m.action.perms = act.at("perms").get<std::vector<std::vector<int>>>();
    if (j.contains("triangle_chamber")) m.triangle_chamber = j.at("triangle_chamber").get<std::vector<int>>();
    if (j.at("header").contains("descriptor")) m.descriptor = j.at("header").at("descriptor");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("mesh json: ") + e.what());
  }
  const auto density = m.density;
  finalize_mesh(m);
  m.density = density;
  return m;
}

void write_obj(const std::string& path, const SymmetricMesh& m, const std::vector<Eigen::Vector3d>* positions) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path);
  const auto& P = positions ? *positions : m.positions;
  out.precision(12);
  for (const auto& p : P) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : m.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw Error(ErrorCode::IOError, "write failed for " + path);
}

}  // namespace eigenmax
