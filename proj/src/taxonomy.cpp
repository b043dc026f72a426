#include "eigenmax/taxonomy.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "eigenmax/error.hpp"

namespace eigenmax {

unsigned species_violations(const Species& s) {
  unsigned bad = 0;
  const int C = s.C(), T = s.T();
  if (!(C + s.W >= 1 && (T == 0 || T == 1))) bad |= 1u;
  if ((T == 0 && !(s.k == 0 || s.k == 2)) || (s.k == 0 && T != 0)) bad |= 2u;
  if (s.orientable && !(s.F == 0 && s.Cm == 0 && s.Tm == 0 && s.Cp + s.Tp == s.genus + 1)) bad |= 4u;
  if (!s.orientable && s.F + 2 * (C + T) != s.genus + 2) bad |= 8u;
  return bad;
}

SpeciesReport validate_species(const Species& s) {
  static const char* names[] = {"clause-i", "clause-ii", "clause-iii", "clause-iv"};
  SpeciesReport r;
  const unsigned bad = species_violations(s);
  for (int i = 0; i < 4; ++i)
    if (bad & (1u << i)) r.violations.emplace_back(names[i]);
  r.valid = bad == 0;
  return r;
}

int euler_char(const Species& s) { return 4 - 2 * s.C() - 2 * s.T() - s.F - s.k; }

int topological_euler_char(const Species& s) {
  return s.orientable ? 2 - 2 * s.genus - s.k : 2 - s.genus - s.k;
}

int pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  if (i == 1 && j == 2) return 0;
  if (i == 1 && j == 3) return 1;
  if (i == 2 && j == 3) return 2;
  throw Error(ErrorCode::BadIndex, "invalid generator pair");
}

bool TypeB::nonnegative() const {
  if (f < 0) return false;
  for (int x : e)
    if (x < 0) return false;
  for (int x : v)
    if (x < 0) return false;
  return true;
}

std::string TypeB::str() const {
  std::ostringstream os;
  bool first = true;
  auto term = [&](int c, const std::string& g) {
    if (c == 0) return;
    if (!first) os << '+';
    first = false;
    if (g.empty())
      os << c;
    else {
      if (c != 1) os << c;
      os << g;
    }
  };
  term(f, "");
  for (int i = 1; i <= 3; ++i) term(e[i - 1], "r" + std::to_string(i));
  const char* pairs[] = {"r1r2", "r1r3", "r2r3"};
  for (int p = 0; p < 3; ++p) term(v[p], pairs[p]);
  if (first) os << '0';
  return os.str();
}

void check_type(const ReflectionGroup& G, const TypeB& b) {
  if (!b.nonnegative()) throw Error(ErrorCode::InvalidType, "negative coefficient in " + b.str());
  const int n = G.rank();
  for (int i = n + 1; i <= 3; ++i)
    if (b.ei(i) != 0) throw Error(ErrorCode::InvalidType, "e index beyond group rank");
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j)
      if (j > n && b.vij(i, j) != 0) throw Error(ErrorCode::InvalidType, "v index beyond group rank");
}

int genus_of_type(const ReflectionGroup& G, const TypeB& b) {
  check_type(G, b);
  const int order = group_order(G);
  // twice (genus + 1), an integer because |G| is divisible by each k_ij
  long long twice = static_cast<long long>(order) * (2LL * b.f);
  for (int i = 1; i <= G.rank(); ++i) twice += static_cast<long long>(order) * b.ei(i);
  for (int i = 1; i <= G.rank(); ++i)
    for (int j = i + 1; j <= G.rank(); ++j) twice += static_cast<long long>(b.vij(i, j)) * (order / G.m(i, j));
  if (twice % 2 != 0) throw Error(ErrorCode::NonIntegerGenus, "half-integer genus for " + b.str());
  const long long g = twice / 2 - 1;
  if (g < 0) throw Error(ErrorCode::NonIntegerGenus, "negative genus for " + b.str());
  return static_cast<int>(g);
}

bool rho1_splits(const ReflectionGroup& G) {
  if (G.kind == GroupKind::OneStar) return true;
  if (G.kind == GroupKind::DihedralStar) return G.params[0] == 2;
  if (G.kind == GroupKind::Platonic) return G.params[0] == 2 && G.params[1] == 2;
  return false;
}

SurfaceDescriptor SurfaceDescriptor::closed(const ReflectionGroup& G, const TypeB& b) {
  check_type(G, b);
  SurfaceDescriptor d;
  d.family = Family::ClosedM;
  d.group = G;
  d.b = b;
  return d;
}

SurfaceDescriptor SurfaceDescriptor::closed_a(int a) {
  if (a < 1) throw Error(ErrorCode::InvalidType, "M(a) needs a >= 1");
  SurfaceDescriptor d;
  d.family = Family::ClosedMa;
  d.a = a;
  d.b.f = a;
  return d;
}

SurfaceDescriptor SurfaceDescriptor::bounded_tau(const ReflectionGroup& G, const TypeB& b) {
  SurfaceDescriptor d = closed(G, b);
  d.family = Family::BoundedNtau;
  return d;
}

SurfaceDescriptor SurfaceDescriptor::bounded_rho1(const ReflectionGroup& G, const TypeB& b) {
  if (!rho1_splits(G)) throw Error(ErrorCode::UnsupportedFamily, "rho1 does not split off a Z2 factor in " + G.name());
  SurfaceDescriptor d = closed(G, b);
  d.family = Family::BoundedNrho1;
  return d;
}

ReflectionGroup SurfaceDescriptor::effective_group() const {
  return family == Family::ClosedMa ? trivial_group() : group;
}

TypeB SurfaceDescriptor::effective_type() const {
  if (family != Family::ClosedMa) return b;
  TypeB t;
  t.f = a;
  return t;
}

int SurfaceDescriptor::genus() const {
  if (closed_family()) return genus_of_type(effective_group(), effective_type());
  return boundary_topology(*this).genus;
}

int SurfaceDescriptor::boundary_count() const {
  if (closed_family()) return 0;
  return boundary_topology(*this).boundary_components;
}

std::string SurfaceDescriptor::key() const {
  switch (family) {
    case Family::ClosedMa: return "M(" + std::to_string(a) + ")";
    case Family::ClosedM: return "M(" + group.name() + "; " + b.str() + ")";
    case Family::BoundedNtau: return "Ntau(" + group.name() + "; " + b.str() + ")";
    case Family::BoundedNrho1: return "Nrho1(" + group.name() + "; " + b.str() + ")";
  }
  return "?";
}

namespace {

SurfaceDescriptor with_type(const SurfaceDescriptor& parent, const TypeB& child) {
  SurfaceDescriptor d = parent;
  if (parent.family == Family::ClosedMa) {
    d.a = child.f;
    d.b = TypeB{};
    d.b.f = child.f;
  } else {
    d.b = child;
  }
  return d;
}

bool child_ok(const SurfaceDescriptor& parent, const TypeB& child) {
  if (!child.nonnegative()) return false;
  try {
    return genus_of_type(parent.effective_group(), child) < genus_of_type(parent.effective_group(), parent.effective_type());
  } catch (const Error&) {
    return false;
  }
}

std::string gen(int i) { return "r" + std::to_string(i); }

// Collapsed-set choice for each elementary form; in_p_iota depends on the doubling involution.
CollapsedClass class_one_minus(const SurfaceDescriptor& p, int i) {
  CollapsedClass c;
  c.description = "{p', q'} in Omega^" + gen(i) + " cap Omega^tau on one component of Omega^tau; Gamma-orbits";
  c.in_p_iota = false;  // fixed by tau (boundary of N_tau); for N_rho1 either on the boundary or not invariant
  (void)p;
  return c;
}

CollapsedClass class_edge_to_corner(const SurfaceDescriptor& p, int i, int j) {
  CollapsedClass c;
  c.description = "<" + gen(i) + "," + gen(j) + ">-orbit of p in S cap Omega^" + gen(j) +
                  ", Stab(S) = <" + gen(i) + "," + gen(j) + ">; Gamma-orbits";
  c.in_p_iota = p.family == Family::BoundedNrho1 && i == 1 && j != 1;
  return c;
}

CollapsedClass class_corner(const SurfaceDescriptor& p, int i, int j) {
  CollapsedClass c;
  c.description = "{p', tau(p')} with p' in Omega^" + gen(i) + " cap Omega^" + gen(j) + "; Gamma-orbits";
  c.in_p_iota = p.family == Family::BoundedNtau;
  return c;
}

}  // namespace

std::vector<DegenerationEdge> elementary_degenerations(const SurfaceDescriptor& parent) {
  std::vector<DegenerationEdge> out;
  const ReflectionGroup G = parent.effective_group();
  const TypeB b = parent.effective_type();
  const int n = G.rank();

  if (n == 0) {
    if (b.f >= 2) {
      TypeB c = b;
      c.f -= 1;
      DegenerationEdge e{parent, with_type(parent, c), "1", "M(a)->M(a-1)",
                         {{"{p', q'} on two components of M^tau", false}}, false};
      out.push_back(std::move(e));
    }
    return out;
  }

  for (int i = 1; i <= n; ++i) {
    TypeB c = b;
    c.f -= 1;
    c.ei(i) += 1;
    if (child_ok(parent, c))
      out.push_back({parent, with_type(parent, c), "1-" + gen(i), "elementary", {class_one_minus(parent, i)}, false});
  }
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) {
      if (i == j) continue;
      TypeB c = b;
      c.ei(i) -= 1;
      c.vij(i, j) += 1;
      if (child_ok(parent, c))
        out.push_back({parent, with_type(parent, c), gen(i) + "-" + gen(std::min(i, j)) + gen(std::max(i, j)),
                       "elementary", {class_edge_to_corner(parent, i, j)}, false});
    }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      TypeB c = b;
      c.vij(i, j) -= 1;
      if (child_ok(parent, c))
        out.push_back({parent, with_type(parent, c), gen(i) + gen(j), "elementary", {class_corner(parent, i, j)}, false});
    }
  return out;
}

std::vector<DegenerationEdge> all_case_degenerations(const SurfaceDescriptor& parent) {
  const ReflectionGroup G = parent.effective_group();
  const TypeB b = parent.effective_type();
  const int n = G.rank();
  std::set<std::string> elementary_children;
  for (const auto& e : elementary_degenerations(parent)) elementary_children.insert(e.child.key());

  std::vector<DegenerationEdge> out;
  std::map<std::string, std::size_t> index;
  auto add = [&](const TypeB& c, const std::string& v, const std::string& tag) {
    if (!child_ok(parent, c)) return;
    SurfaceDescriptor child = with_type(parent, c);
    const std::string k = child.key() + "|" + v;
    auto it = index.find(k);
    if (it != index.end()) {
      out[it->second].case_tag += "," + tag;
      return;
    }
    index[k] = out.size();
    DegenerationEdge e{parent, child, v, tag, {{"single-orbit curve collapse (" + tag + ")", false}},
                       elementary_children.count(child.key()) == 0};
    out.push_back(std::move(e));
  };

  TypeB c = b;
  c.f -= 1;
  if (b.f >= 1) add(c, "1", "case-2a");
  if (b.f >= 2) add(c, "1", "case-3b");
  if (b.f >= 1) add(c, "1", "case-3c");
  for (int i = 1; i <= n; ++i) {
    if (b.f >= 1) {
      TypeB d = b;
      d.f -= 1;
      d.ei(i) += 1;
      add(d, "1-" + gen(i), "case-3c");
    }
    if (b.ei(i) >= 1) {
      TypeB d = b;
      d.ei(i) -= 1;
      add(d, gen(i), "case-2b");
    }
    for (int j = 1; j <= n; ++j) {
      if (j == i) continue;
      if (b.ei(i) >= 1 && b.vij(i, j) == 0) {
        TypeB d = b;
        d.ei(i) -= 1;
        d.vij(i, j) += 1;
        add(d, gen(i) + "-" + gen(std::min(i, j)) + gen(std::max(i, j)), "case-2b");
      }
    }
  }
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (b.vij(i, j) >= 1) {
        TypeB d = b;
        d.vij(i, j) -= 1;
        add(d, gen(i) + gen(j), "case-2b");
      }
  return out;
}

DegenerationDag degeneration_dag(const SurfaceDescriptor& root, int depth, DegenerationMode mode) {
  DegenerationDag dag;
  std::map<std::string, int> id;
  dag.nodes.push_back(root);
  id[root.key()] = 0;
  std::vector<int> level{0};
  std::queue<int> q;
  q.push(0);
  std::set<int> expanded;
  while (!q.empty()) {
    const int cur = q.front();
    q.pop();
    if (level[cur] >= depth || expanded.count(cur)) continue;
    expanded.insert(cur);
    auto edges = mode == DegenerationMode::Elementary ? elementary_degenerations(dag.nodes[cur])
                                                      : all_case_degenerations(dag.nodes[cur]);
    for (auto& e : edges) {
      const std::string k = e.child.key();
      int cid;
      auto it = id.find(k);
      if (it == id.end()) {
        cid = static_cast<int>(dag.nodes.size());
        id[k] = cid;
        dag.nodes.push_back(e.child);
        level.push_back(level[cur] + 1);
        q.push(cid);
      } else {
        cid = it->second;
      }
      dag.edges.push_back(std::move(e));
      dag.edge_nodes.emplace_back(cur, cid);
    }
  }
  // longest chain from the root by memoized DFS (edges strictly lower genus, so acyclic)
  std::vector<std::vector<int>> succ(dag.nodes.size());
  for (auto [a, b] : dag.edge_nodes) succ[a].push_back(b);
  std::vector<int> memo(dag.nodes.size(), -1);
  std::function<int(int)> longest = [&](int u) {
    if (memo[u] >= 0) return memo[u];
    int best = 0;
    for (int w : succ[u]) best = std::max(best, 1 + longest(w));
    return memo[u] = best;
  };
  dag.complexity = longest(0);
  return dag;
}

std::string DegenerationDag::to_dot() const {
  std::ostringstream os;
  os << "digraph degenerations {\n";
  for (std::size_t i = 0; i < nodes.size(); ++i)
    os << "  n" << i << " [label=\"" << nodes[i].key() << "\\ngenus " << nodes[i].genus() << "\"];\n";
  for (std::size_t e = 0; e < edges.size(); ++e) {
    os << "  n" << edge_nodes[e].first << " -> n" << edge_nodes[e].second << " [label=\"" << edges[e].v;
    if (edges[e].outside_elementary_list) os << " *";
    os << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

nlohmann::json DegenerationDag::to_json() const {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json nj = eigenmax::to_json(n);
    nj["key"] = n.key();
    nj["genus"] = n.genus();
    j["nodes"].push_back(nj);
  }
  j["edges"] = nlohmann::json::array();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& c : edges[e].partition) parts.push_back({{"class", c.description}, {"in_p_iota", c.in_p_iota}});
    j["edges"].push_back({{"from", edge_nodes[e].first},
                          {"to", edge_nodes[e].second},
                          {"v", edges[e].v},
                          {"case", edges[e].case_tag},
                          {"outside_elementary_list", edges[e].outside_elementary_list},
                          {"partition", parts}});
  }
  j["complexity"] = complexity;
  return j;
}

MarkedClosed double_surface(const SurfaceDescriptor& n) {
  switch (n.family) {
    case Family::BoundedNtau: {
      if (n.group.kind == GroupKind::Trivial) return {SurfaceDescriptor::closed_a(n.b.f), "tau"};
      return {SurfaceDescriptor::closed(n.group, n.b), "tau"};
    }
    case Family::BoundedNrho1: return {SurfaceDescriptor::closed(n.group, n.b), "rho1"};
    default: throw Error(ErrorCode::UnsupportedFamily, "double needs a bounded descriptor");
  }
}

SurfaceDescriptor halve(const MarkedClosed& m) {
  if (!m.surface.closed_family()) throw Error(ErrorCode::UnsupportedFamily, "halve needs a closed descriptor");
  if (m.reflection == "tau") return SurfaceDescriptor::bounded_tau(m.surface.effective_group(), m.surface.effective_type());
  if (m.reflection == "rho1") {
    if (m.surface.family == Family::ClosedMa || !rho1_splits(m.surface.group))
      throw Error(ErrorCode::NotSeparating, "rho1 is not a separating reflection here");
    return SurfaceDescriptor::bounded_rho1(m.surface.group, m.surface.b);
  }
  throw Error(ErrorCode::NotSeparating, "reflection '" + m.reflection + "' is not a separating reflection");
}

BoundaryTopology boundary_topology(const SurfaceDescriptor& n) {
  if (n.family == Family::BoundedNtau) {
    return {0, genus_of_type(n.group, n.b) + 1};
  }
  if (n.family != Family::BoundedNrho1) throw Error(ErrorCode::UnsupportedFamily, "boundary_topology needs a bounded descriptor");
  const TypeB& b = n.b;
  const ReflectionGroup& G = n.group;
  if (G.kind == GroupKind::OneStar) {
    if (b.ei(1) > 0) return {b.f, b.ei(1)};
    if (b.f < 1) throw Error(ErrorCode::NonIntegerGenus, "empty type");
    return {b.f - 1, 2};
  }
  if (G.kind == GroupKind::DihedralStar && G.params[0] == 2) {
    if (b.ei(1) + b.vij(1, 2) > 0) return {2 * b.f + b.ei(2), 2 * b.ei(1) + b.vij(1, 2)};
    return {2 * b.f + b.ei(2) - 1, 2};
  }
  if (G.kind == GroupKind::Platonic && G.params[0] == 2 && G.params[1] == 2) {
    const int k = G.params[2];
    const int bc = 2 * b.ei(1) + b.vij(1, 2) + b.vij(1, 3);
    const int g = k * (2 * b.f + b.ei(2) + b.ei(3)) + b.vij(2, 3);
    if (bc > 0) return {g, k * bc};
    return {g - 1, 2};
  }
  throw Error(ErrorCode::UnsupportedFamily, "no rho1 splitting for " + G.name());
}

Species species_of(const SurfaceDescriptor& d) {
  if (!d.closed_family()) throw Error(ErrorCode::UnsupportedFamily, "species_of needs a closed descriptor");
  Species s;
  s.genus = d.genus();
  s.orientable = true;
  s.Cp = s.genus + 1;
  return s;
}

nlohmann::json to_json(const TypeB& b) {
  nlohmann::json e = nlohmann::json::object(), v = nlohmann::json::object();
  for (int i = 1; i <= 3; ++i)
    if (b.ei(i)) e[std::to_string(i)] = b.ei(i);
  const char* pairs[] = {"12", "13", "23"};
  for (int p = 0; p < 3; ++p)
    if (b.v[p]) v[pairs[p]] = b.v[p];
  return {{"f", b.f}, {"e", e}, {"v", v}};
}

TypeB type_from_json(const nlohmann::json& j) {
  TypeB b;
  b.f = j.value("f", 0);
  if (j.contains("e"))
    for (auto& [k, val] : j.at("e").items()) {
      const int i = std::stoi(k);
      if (i < 1 || i > 3) throw Error(ErrorCode::InvalidType, "bad e index " + k);
      b.ei(i) = val.get<int>();
    }
  if (j.contains("v"))
    for (auto& [k, val] : j.at("v").items()) {
      std::string s = k;
      s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c < '0' || c > '9'; }), s.end());
      if (s.size() != 2) throw Error(ErrorCode::InvalidType, "bad v index " + k);
      b.vij(s[0] - '0', s[1] - '0') = val.get<int>();
    }
  return b;
}

nlohmann::json to_json(const SurfaceDescriptor& d) {
  static const char* fam[] = {"M", "Ma", "Ntau", "Nrho1"};
  nlohmann::json j{{"family", fam[static_cast<int>(d.family)]}};
  if (d.family == Family::ClosedMa) {
    j["a"] = d.a;
  } else {
    j["group"] = to_json(d.group);
    j["b"] = to_json(d.b);
  }
  return j;
}

SurfaceDescriptor descriptor_from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "Ma") return SurfaceDescriptor::closed_a(j.at("a").get<int>());
  const ReflectionGroup G = j.contains("group") ? group_from_json(j.at("group")) : trivial_group();
  const TypeB b = j.contains("b") ? type_from_json(j.at("b")) : TypeB{};
  if (fam == "M") return SurfaceDescriptor::closed(G, b);
  if (fam == "Ntau") return SurfaceDescriptor::bounded_tau(G, b);
  if (fam == "Nrho1") return SurfaceDescriptor::bounded_rho1(G, b);
  throw Error(ErrorCode::ParseError, "unknown family '" + fam + "'");
}

nlohmann::json to_json(const Species& s) {
  return {{"genus", s.genus}, {"k", s.k}, {"epsilon", s.orientable ? "+" : "-"}, {"F", s.F}, {"Cm", s.Cm},
          {"Cp", s.Cp},       {"Tm", s.Tm}, {"Tp", s.Tp}, {"W", s.W}};
}

Species species_from_json(const nlohmann::json& j) {
  Species s;
  s.genus = j.at("genus").get<int>();
  s.k = j.value("k", 0);
  if (j.contains("epsilon")) {
    const std::string eps = j.at("epsilon").get<std::string>();
    if (eps != "+" && eps != "-") throw Error(ErrorCode::ParseError, "epsilon must be + or -");
    s.orientable = eps == "+";
  } else {
    s.orientable = j.value("orientable", true);
  }
  s.F = j.value("F", 0);
  s.Cm = j.value("Cm", 0);
  s.Cp = j.value("Cp", 0);
  s.Tm = j.value("Tm", 0);
  s.Tp = j.value("Tp", 0);
  s.W = j.value("W", s.Tm + s.Tp);
  for (int x : {s.genus, s.k, s.F, s.Cm, s.Cp, s.Tm, s.Tp, s.W})
    if (x < 0) throw Error(ErrorCode::ParseError, "species fields must be nonnegative");
  return s;
}

}  // namespace eigenmax
