#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <numeric>
#include <set>

#include "eigenmax/error.hpp"
#include "eigenmax/mesh.hpp"

namespace eigenmax {

namespace {
using Eigen::Vector2d;
using Eigen::Vector3d;
constexpr double kPi = std::numbers::pi;

double sdist(const Vector3d& a, const Vector3d& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

// Circle arc on the unit sphere: cr*c + sr*(cos t u + sin t w). Great circles have cr = 0, sr = 1.
struct Piece {
  Vector3d c, u, w;
  double cr = 0.0, sr = 1.0;
  double t0 = 0.0, t1 = 0.0;
  int start = -1, end = -1;  // registered endpoint ids (equal for closed loops)
  unsigned bit = 0;          // FixedBits of the mirror containing the arc
  PanelLabel label;
  int min_segments = 1;
  Vector3d at(double t) const { return (cr * c + sr * (std::cos(t) * u + std::sin(t) * w)).normalized(); }
};

struct Segment {
  int a, b, piece;
  double ta, tb;
};

struct Hole {
  Vector3d c;
  int own_panel_a = 0, own_panel_b = 0;  // 1-based panels the centre lies on
};

// Incremental Delaunay triangulation (Bowyer-Watson) with walking point location.
class Delaunay {
 public:
  explicit Delaunay(const std::vector<Vector2d>& pts) {
    Vector2d lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vector2d mid = 0.5 * (lo + hi);
    const double span = std::max((hi - lo).maxCoeff(), 1e-3) * 50.0;
    P = pts;
    super = static_cast<int>(P.size());
    P.push_back(mid + Vector2d(-span, -span));
    P.push_back(mid + Vector2d(span, -span));
    P.push_back(mid + Vector2d(0, span));
    tris.push_back({{super, super + 1, super + 2}, {-1, -1, -1}, true});
  }

  int add_point(const Vector2d& p) {
    // Super vertices stay at the end of P.
    P.insert(P.begin() + super, p);
    const int id = super++;
    for (auto& t : tris)
      for (int& v : t.v)
        if (v >= id) ++v;
    return id;
  }

  void insert(int id) {
    const Vector2d& p = P[id];
    const int t0 = locate(p);
    std::vector<char> in(tris.size(), 0);
    std::vector<int> cavity{t0};
    in[t0] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      const Tri& t = tris[cavity[q]];
      for (int k = 0; k < 3; ++k) {
        const int nb = t.n[k];
        if (nb < 0 || in[nb]) continue;
        if (incircle(tris[nb], p) > 0) {
          in[nb] = 1;
          cavity.push_back(nb);
        }
      }
    }
    // Keep the cavity star-shaped from p.
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t q = 0; q < cavity.size(); ++q) {
        const int ti = cavity[q];
        if (ti == t0) continue;
        const Tri& t = tris[ti];
        for (int k = 0; k < 3; ++k) {
          const int nb = t.n[k];
          if (nb >= 0 && in[nb]) continue;
          if (orient(P[t.v[(k + 1) % 3]], P[t.v[(k + 2) % 3]], p) <= 0) {
            in[ti] = 0;
            cavity.erase(cavity.begin() + static_cast<long>(q));
            changed = true;
            break;
          }
        }
        if (changed) break;
      }
    }
    std::map<int, std::pair<int, int>> spoke;  // vertex -> (new triangle, local index of the edge p-vertex)
    const int first_new = static_cast<int>(tris.size());
    for (int ti : cavity) {
      const Tri t = tris[ti];
      for (int k = 0; k < 3; ++k) {
        const int nb = t.n[k];
        if (nb >= 0 && in[nb]) continue;
        const int a = t.v[(k + 1) % 3], b = t.v[(k + 2) % 3];
        const int nt = static_cast<int>(tris.size());
        tris.push_back({{a, b, id}, {-1, -1, nb}, true});
        if (nb >= 0)
          for (int& x : tris[nb].n)
            if (x == ti) x = nt;
        // edge (b, id) is opposite a (local 0); edge (id, a) is opposite b (local 1)
        link(spoke, b, nt, 0);
        link(spoke, a, nt, 1);
      }
    }
    for (int ti : cavity) tris[ti].alive = false;
    last = first_new;
  }

  struct Tri {
    int v[3];
    int n[3];
    bool alive;
  };
  std::vector<Vector2d> P;
  std::vector<Tri> tris;
  int super = 0;

 private:
  int last = 0;

  void link(std::map<int, std::pair<int, int>>& spoke, int w, int t, int k) {
    auto it = spoke.find(w);
    if (it == spoke.end()) {
      spoke[w] = {t, k};
      return;
    }
    tris[t].n[k] = it->second.first;
    tris[it->second.first].n[it->second.second] = t;
    spoke.erase(it);
  }

  static double orient(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  }

  double incircle(const Tri& t, const Vector2d& d) const {
    const Vector2d a = P[t.v[0]] - d, b = P[t.v[1]] - d, c = P[t.v[2]] - d;
    const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
    return a.x() * (b.y() * c2 - b2 * c.y()) - a.y() * (b.x() * c2 - b2 * c.x()) + a2 * (b.x() * c.y() - b.y() * c.x());
  }

  int locate(const Vector2d& p) {
    int t = last;
    if (t >= static_cast<int>(tris.size()) || !tris[t].alive)
      for (t = static_cast<int>(tris.size()) - 1; !tris[t].alive; --t) {
      }
    unsigned rot = 0;
    for (int steps = 0; steps < 4 * static_cast<int>(tris.size()) + 16; ++steps) {
      const Tri& T = tris[t];
      bool moved = false;
      for (int kk = 0; kk < 3; ++kk) {
        const int k = static_cast<int>((kk + rot) % 3);
        if (orient(P[T.v[(k + 1) % 3]], P[T.v[(k + 2) % 3]], p) < 0 && T.n[k] >= 0) {
          t = T.n[k];
          moved = true;
          break;
        }
      }
      ++rot;
      if (!moved) return t;
    }
    for (int i = 0; i < static_cast<int>(tris.size()); ++i) {
      const Tri& T = tris[i];
      if (!T.alive) continue;
      if (orient(P[T.v[0]], P[T.v[1]], p) >= 0 && orient(P[T.v[1]], P[T.v[2]], p) >= 0 &&
          orient(P[T.v[2]], P[T.v[0]], p) >= 0)
        return i;
    }
    throw Error(ErrorCode::InfeasibleResolution, "point location failed");
  }
};

struct ChamberGeometry {
  std::vector<Vector3d> normals;  // panels
  Vector3d center;                // a deep interior point; projection is from -center
  std::vector<Hole> holes;
  double r = 0.0;
};

Vector3d chamber_center(const ReflectionGroup& G, const std::vector<Vector3d>& ns) {
  switch (G.kind) {
    case GroupKind::Trivial: return {0, 0, 1};
    case GroupKind::OneStar: return ns[0];
    case GroupKind::DihedralStar: {
      const double phi = kPi / 2 - kPi / (2.0 * G.params[0]);
      return {std::cos(phi), std::sin(phi), 0};
    }
    case GroupKind::Platonic: {
      Vector3d s = Vector3d::Zero();
      for (int i = 0; i < 3; ++i) {
        Vector3d c = ns[(i + 1) % 3].cross(ns[(i + 2) % 3]);
        if (c.dot(ns[i]) < 0) c = -c;
        s += c.normalized();
      }
      return s.normalized();
    }
  }
  return {0, 0, 1};
}

// Fibonacci lattice of n nearly uniform points.
std::vector<Vector3d> fibonacci(int n) {
  std::vector<Vector3d> out;
  out.reserve(n);
  const double ga = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
    out.emplace_back(rr * std::cos(ga * i), rr * std::sin(ga * i), z);
  }
  return out;
}

ChamberMesh mesh_domain(const ReflectionGroup& G, const TypeB& b, double h, bool trivial_a, int a) {
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorCode::InfeasibleResolution, "edge length must be positive");
  ChamberGeometry geo;
  geo.normals = mirror_normals(G);
  const auto& ns = geo.normals;
  const int rank = G.rank();
  auto inside_panels = [&](const Vector3d& p) {
    for (const auto& n : ns)
      if (n.dot(p) < 0) return false;
    return true;
  };
  auto panel_dist = [&](const Vector3d& p, int skip_a, int skip_b) {
    double d = kPi;
    for (int i = 1; i <= rank; ++i)
      if (i != skip_a && i != skip_b) d = std::min(d, std::asin(std::clamp(std::abs(ns[i - 1].dot(p)), 0.0, 1.0)));
    return d;
  };

  // Panels: great-circle arcs u..w with span; endpoints are registered corner ids.
  struct Panel {
    Vector3d u, w;
    double span = 0;
    int corner_start = -1, corner_end = -1;  // index into corners
    bool closed = false;
  };
  struct Corner {
    Vector3d p;
    int i = 0, j = 0, k = 2;
  };
  std::vector<Panel> panels(rank);
  std::vector<Corner> corners;
  if (G.kind == GroupKind::OneStar) {
    panels[0] = {Vector3d(0, 1, 0), Vector3d(0, 0, 1), 2 * kPi, -1, -1, true};
  } else if (G.kind == GroupKind::DihedralStar) {
    const int k = G.params[0];
    corners.push_back({Vector3d(0, 0, 1), 1, 2, k});
    corners.push_back({Vector3d(0, 0, -1), 1, 2, k});
    const double phi2 = kPi / 2 - kPi / k;
    panels[0] = {Vector3d(0, 0, 1), Vector3d(0, 1, 0), kPi, 0, 1, false};
    panels[1] = {Vector3d(0, 0, 1), Vector3d(std::cos(phi2), std::sin(phi2), 0), kPi, 0, 1, false};
  } else if (G.kind == GroupKind::Platonic) {
    // corner c_ij opposite panel k
    const int pairs[3][3] = {{1, 2, 3}, {1, 3, 2}, {2, 3, 1}};
    for (const auto& pr : pairs) {
      Vector3d c = ns[pr[0] - 1].cross(ns[pr[1] - 1]);
      if (c.dot(ns[pr[2] - 1]) < 0) c = -c;
      corners.push_back({c.normalized(), pr[0], pr[1], G.m(pr[0], pr[1])});
    }
    for (int i = 1; i <= 3; ++i) {
      std::vector<int> cs;
      for (int c = 0; c < 3; ++c)
        if (corners[c].i == i || corners[c].j == i) cs.push_back(c);
      const Vector3d A = corners[cs[0]].p, B = corners[cs[1]].p;
      panels[i - 1] = {A, (B - A.dot(B) * A).normalized(), sdist(A, B), cs[0], cs[1], false};
    }
  }
  auto panel_point = [&](int i, double s) {
    const Panel& P = panels[i - 1];
    return Vector3d((std::cos(s) * P.u + std::sin(s) * P.w).normalized());
  };
  auto panel_tangent = [&](int i, double s) {
    const Panel& P = panels[i - 1];
    return Vector3d(-std::sin(s) * P.u + std::cos(s) * P.w);
  };

  // Hole centres.
  struct EdgeHole {
    int panel;
    double s;
  };
  std::vector<EdgeHole> edge_holes;
  std::vector<int> corner_holes;
  if (trivial_a) {
    geo.holes.push_back({Vector3d(0, 0, -1)});
  } else {
    for (int i = 1; i <= rank; ++i) {
      const int e = b.ei(i);
      for (int q = 0; q < e; ++q) {
        const double s = panels[i - 1].closed ? 2 * kPi * q / e : panels[i - 1].span * (q + 1) / (e + 1);
        edge_holes.push_back({i, s});
        geo.holes.push_back({panel_point(i, s), i, 0});
      }
    }
    if (G.kind == GroupKind::DihedralStar) {
      for (int q = 0; q < std::min(2, b.vij(1, 2)); ++q) corner_holes.push_back(q);
      if (b.vij(1, 2) > 2) throw Error(ErrorCode::InvalidType, "at most two corner circles in a dihedral chamber");
    } else if (G.kind == GroupKind::Platonic) {
      for (int c = 0; c < 3; ++c) {
        const int v = b.vij(corners[c].i, corners[c].j);
        if (v > 1) throw Error(ErrorCode::InvalidType, "at most one circle per chamber corner");
        if (v == 1) corner_holes.push_back(c);
      }
    }
    for (int c : corner_holes) geo.holes.push_back({corners[c].p, corners[c].i, corners[c].j});
  }
  const int f = trivial_a ? a : b.f;
  {
    const auto cand = fibonacci(4000);
    const int already = trivial_a ? 1 : 0;
    for (int q = already; q < f; ++q) {
      double best = -1;
      Vector3d pick(0, 0, 1);
      for (const auto& p : cand) {
        if (!inside_panels(p)) continue;
        double s = 2.0 * panel_dist(p, 0, 0);
        for (const auto& hl : geo.holes) s = std::min(s, sdist(p, hl.c));
        if (s > best + 1e-12) {
          best = s;
          pick = p;
        }
      }
      geo.holes.push_back({pick});
    }
  }
  if (geo.holes.empty()) throw Error(ErrorCode::InvalidType, "type has no fixed circles");

  if (trivial_a && a == 1) {
    geo.r = kPi / 2;
  } else {
    double m = kPi;
    for (std::size_t x = 0; x < geo.holes.size(); ++x) {
      for (std::size_t y = x + 1; y < geo.holes.size(); ++y) m = std::min(m, sdist(geo.holes[x].c, geo.holes[y].c));
      m = std::min(m, 2.0 * panel_dist(geo.holes[x].c, geo.holes[x].own_panel_a, geo.holes[x].own_panel_b));
    }
    geo.r = 0.35 * m;
  }
  const double r = geo.r;
  h = std::min(h, 2 * kPi * std::sin(r) / 10.0);
  geo.center = trivial_a ? Vector3d(-geo.holes[0].c) : chamber_center(G, ns);

  // Boundary points and pieces.
  std::vector<Vector3d> pts;
  std::vector<unsigned> mask;
  auto reg = [&](const Vector3d& p) {
    pts.push_back(p.normalized());
    mask.push_back(0);
    return static_cast<int>(pts.size()) - 1;
  };
  std::vector<Piece> pieces;
  std::vector<int> corner_id(corners.size(), -1);
  for (std::size_t c = 0; c < corners.size(); ++c)
    if (std::find(corner_holes.begin(), corner_holes.end(), static_cast<int>(c)) == corner_holes.end())
      corner_id[c] = reg(corners[c].p);

  // Panel cuts: (s_lo, s_hi, id_lo, id_hi).
  struct Cut {
    double lo, hi;
    int id_lo, id_hi;
  };
  std::vector<std::vector<Cut>> cuts(rank);
  auto tau_piece = [&](const Vector3d& c, const Vector3d& u, const Vector3d& w, double t1, int s_id, int e_id) {
    Piece P;
    P.c = c;
    P.u = u;
    P.w = w;
    P.cr = std::cos(r);
    P.sr = std::sin(r);
    P.t0 = 0;
    P.t1 = t1;
    P.start = s_id;
    P.end = e_id;
    P.bit = FixTau;
    P.label = {PanelLabel::MirrorTau, 0};
    P.min_segments = std::max(2, static_cast<int>(std::ceil(10.0 * t1 / (2 * kPi))));
    pieces.push_back(P);
  };
  for (const auto& eh : edge_holes) {
    const int lo = reg(panel_point(eh.panel, eh.s - r)), hi = reg(panel_point(eh.panel, eh.s + r));
    double slo = eh.s - r, shi = eh.s + r;
    cuts[eh.panel - 1].push_back({slo, shi, lo, hi});
    tau_piece(panel_point(eh.panel, eh.s), panel_tangent(eh.panel, eh.s), ns[eh.panel - 1], kPi, hi, lo);
  }
  for (int c : corner_holes) {
    const Corner& C = corners[c];
    int ids[2];
    Vector3d tang[2];
    for (int side = 0; side < 2; ++side) {
      const int i = side == 0 ? C.i : C.j;
      const Panel& P = panels[i - 1];
      const bool at_start = P.corner_start == c;
      const double s = at_start ? r : P.span - r;
      ids[side] = reg(panel_point(i, s));
      tang[side] = at_start ? panel_tangent(i, 0) : Vector3d(-panel_tangent(i, P.span));
      if (at_start)
        cuts[i - 1].push_back({-1.0, r, -1, ids[side]});
      else
        cuts[i - 1].push_back({P.span - r, P.span + 1.0, ids[side], -1});
    }
    const Vector3d u = tang[0], w = (tang[1] - tang[1].dot(u) * u).normalized();
    tau_piece(C.p, u, w, std::acos(std::clamp(tang[0].dot(tang[1]), -1.0, 1.0)), ids[0], ids[1]);
  }
  for (std::size_t q = 0; q < geo.holes.size(); ++q) {
    const Hole& H = geo.holes[q];
    if (H.own_panel_a != 0) continue;
    Vector3d u = H.c.cross(Vector3d(0.3, 0.5, 0.8));
    if (u.norm() < 0.1) u = H.c.cross(Vector3d(1, 0, 0));
    u.normalize();
    const Vector3d w = H.c.cross(u);
    const int s = reg(std::cos(r) * H.c + std::sin(r) * u);
    tau_piece(H.c, u, w, 2 * kPi, s, s);
  }
  for (int i = 1; i <= rank; ++i) {
    const Panel& P = panels[i - 1];
    auto cs = cuts[i - 1];
    std::sort(cs.begin(), cs.end(), [](const Cut& x, const Cut& y) { return x.lo < y.lo; });
    auto add = [&](double s0, double s1, int id0, int id1) {
      Piece pc;
      pc.c = Vector3d::Zero();
      pc.u = P.u;
      pc.w = P.w;
      pc.t0 = s0;
      pc.t1 = s1;
      pc.start = id0;
      pc.end = id1;
      pc.bit = 1u << (i - 1);
      pc.label = {PanelLabel::Mirror, i};
      pc.min_segments = 1;
      pieces.push_back(pc);
    };
    if (P.closed) {
      if (cs.empty()) {
        const int s = reg(panel_point(i, 0));
        add(0, 2 * kPi, s, s);
      } else {
        for (std::size_t q = 0; q < cs.size(); ++q) {
          const Cut& A = cs[q];
          const Cut& B = cs[(q + 1) % cs.size()];
          double hi = B.lo;
          if (q + 1 == cs.size()) hi += 2 * kPi;
          add(A.hi, hi, A.id_hi, B.id_lo);
        }
      }
    } else {
      double s = 0;
      int id = corner_id[P.corner_start];
      for (const auto& c : cs) {
        if (c.lo > s + 1e-12) add(s, c.lo, id, c.id_lo);
        s = c.hi;
        id = c.id_hi;
      }
      if (s < P.span - 1e-12) add(s, P.span, id, corner_id[P.corner_end]);
    }
  }
  for (const auto& pc : pieces) {
    if (pc.start < 0 || pc.end < 0) throw Error(ErrorCode::InfeasibleResolution, "inconsistent chamber boundary");
    mask[pc.start] |= pc.bit;
    mask[pc.end] |= pc.bit;
  }

  // Sample pieces into segments.
  std::vector<Segment> segs;
  for (int q = 0; q < static_cast<int>(pieces.size()); ++q) {
    const Piece& pc = pieces[q];
    const double len = pc.sr * std::abs(pc.t1 - pc.t0);
    const int n = std::max(pc.min_segments, static_cast<int>(std::ceil(len / h - 1e-9)));
    int prev = pc.start;
    double tprev = pc.t0;
    for (int k = 1; k <= n; ++k) {
      const double t = pc.t0 + (pc.t1 - pc.t0) * k / n;
      int id;
      if (k == n) {
        id = pc.end;
      } else {
        id = reg(pc.at(t));
        mask[id] |= pc.bit;
      }
      segs.push_back({prev, id, q, tprev, t});
      prev = id;
      tprev = t;
    }
  }

  auto depth = [&](const Vector3d& p) {
    double d = kPi;
    for (const auto& n : ns) d = std::min(d, std::asin(std::clamp(n.dot(p), -1.0, 1.0)));
    for (const auto& hl : geo.holes) d = std::min(d, sdist(p, hl.c) - r);
    return d;
  };
  {
    const int nf = static_cast<int>(std::ceil(4 * kPi / (0.5 * std::sqrt(3.0) * h * h)));
    for (const auto& p : fibonacci(nf))
      if (depth(p) >= 0.6 * h) reg(p);
  }
  // Padding outside the domain keeps boundary chords off the convex hull; flood fill drops it.
  {
    const int nf = static_cast<int>(std::ceil(4 * kPi / (0.5 * std::sqrt(3.0) * 4 * h * h)));
    const Vector3d c0 = geo.center;
    for (const auto& p : fibonacci(nf))
      if (depth(p) <= -0.6 * h && p.dot(c0) > -0.6) reg(p);
  }

  // Stereographic projection from -center; e1 x e2 = center keeps orientation.
  const Vector3d c0 = geo.center;
  Vector3d e1 = c0.cross(std::abs(c0.z()) < 0.9 ? Vector3d(0, 0, 1) : Vector3d(1, 0, 0)).normalized();
  Vector3d e2 = c0.cross(e1);
  auto project = [&](const Vector3d& p) -> Vector2d { return Vector2d(p.dot(e1), p.dot(e2)) / (1.0 + p.dot(c0)); };
  std::vector<Vector2d> P2;
  for (const auto& p : pts) P2.push_back(project(p));
  Delaunay dt(P2);
  // Delaunay ids equal pts ids as long as points are added through add_point.
  for (int v = 0; v < static_cast<int>(pts.size()); ++v) dt.insert(v);

  auto edge_set = [&]() {
    std::set<std::pair<int, int>> es;
    for (const auto& t : dt.tris) {
      if (!t.alive) continue;
      for (int k = 0; k < 3; ++k) es.insert(std::minmax(t.v[k], t.v[(k + 1) % 3]));
    }
    return es;
  };
  for (int round = 0;; ++round) {
    const auto es = edge_set();
    std::vector<Segment> next;
    bool missing = false;
    for (const auto& s : segs) {
      if (es.count(std::minmax(s.a, s.b))) {
        next.push_back(s);
        continue;
      }
      missing = true;
      if (round >= 8) throw Error(ErrorCode::InfeasibleResolution, "boundary recovery did not converge");
      const double tm = 0.5 * (s.ta + s.tb);
      const Vector3d p = pieces[s.piece].at(tm);
      pts.push_back(p);
      mask.push_back(pieces[s.piece].bit);
      const int id = dt.add_point(project(p));
      if (id != static_cast<int>(pts.size()) - 1) throw Error(ErrorCode::InfeasibleResolution, "index drift");
      dt.insert(id);
      next.push_back({s.a, id, s.piece, s.ta, tm});
      next.push_back({id, s.b, s.piece, tm, s.tb});
    }
    segs = std::move(next);
    if (!missing) break;
  }

  // Flood fill from the deepest triangle without crossing boundary segments.
  std::set<std::pair<int, int>> constrained;
  for (const auto& s : segs) constrained.insert(std::minmax(s.a, s.b));
  const int nt = static_cast<int>(dt.tris.size());
  int seed = -1;
  double best = -1e9;
  for (int t = 0; t < nt; ++t) {
    const auto& T = dt.tris[t];
    if (!T.alive || T.v[0] >= dt.super || T.v[1] >= dt.super || T.v[2] >= dt.super) continue;
    const double d = depth((pts[T.v[0]] + pts[T.v[1]] + pts[T.v[2]]).normalized());
    if (d > best) {
      best = d;
      seed = t;
    }
  }
  if (seed < 0 || best <= 0) throw Error(ErrorCode::InfeasibleResolution, "chamber has no interior triangles");
  std::vector<char> keep(nt, 0);
  std::deque<int> queue{seed};
  keep[seed] = 1;
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    const auto& T = dt.tris[t];
    for (int k = 0; k < 3; ++k) {
      const int nb = T.n[k];
      if (nb < 0 || keep[nb]) continue;
      if (constrained.count(std::minmax(T.v[(k + 1) % 3], T.v[(k + 2) % 3]))) continue;
      const auto& N = dt.tris[nb];
      if (N.v[0] >= dt.super || N.v[1] >= dt.super || N.v[2] >= dt.super)
        throw Error(ErrorCode::InfeasibleResolution, "chamber boundary is not closed");
      keep[nb] = 1;
      queue.push_back(nb);
    }
  }

  ChamberMesh out;
  out.group = G;
  out.type = b;
  out.hole_radius = r;
  SymmetricMesh& m = out.mesh;
  std::vector<int> remap(pts.size(), -1);
  for (int t = 0; t < nt; ++t) {
    if (!keep[t]) continue;
    std::array<int, 3> tri;
    for (int k = 0; k < 3; ++k) {
      int& id = remap[dt.tris[t].v[k]];
      if (id < 0) {
        id = m.num_vertices();
        m.positions.push_back(pts[dt.tris[t].v[k]]);
        out.fixed_mask.push_back(mask[dt.tris[t].v[k]]);
      }
      tri[k] = id;
    }
    m.triangles.push_back(tri);
  }
  for (const auto& s : segs)
    if (remap[s.a] < 0 || remap[s.b] < 0) throw Error(ErrorCode::InfeasibleResolution, "boundary vertex lost");

  // An interior edge joining two vertices on a common mirror would be doubled by
  // that reflection; split it at its midpoint.
  for (bool again = true; again;) {
    again = false;
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < m.num_triangles(); ++t)
      for (int k = 0; k < 3; ++k) edge_tris[std::minmax(m.triangles[t][k], m.triangles[t][(k + 1) % 3])].push_back(t);
    std::vector<char> touched(m.num_triangles(), 0);
    for (const auto& [e, ts] : edge_tris) {
      if (ts.size() != 2 || !(out.fixed_mask[e.first] & out.fixed_mask[e.second])) continue;
      if (touched[ts[0]] || touched[ts[1]]) {
        again = true;
        continue;
      }
      const int mid = m.num_vertices();
      m.positions.push_back((m.positions[e.first] + m.positions[e.second]).normalized());
      out.fixed_mask.push_back(0);
      for (int t : ts) {
        touched[t] = 1;
        auto T = m.triangles[t];
        int k = 0;
        while (!((T[k] == e.first && T[(k + 1) % 3] == e.second) || (T[k] == e.second && T[(k + 1) % 3] == e.first))) ++k;
        const int a = T[k], b = T[(k + 1) % 3], c = T[(k + 2) % 3];
        m.triangles[t] = {a, mid, c};
        m.triangles.push_back({mid, b, c});
      }
    }
  }

  // Laplacian smoothing of interior vertices with an orientation guard.
  {
    std::vector<std::vector<int>> nbrs(m.num_vertices()), star(m.num_vertices());
    for (int t = 0; t < m.num_triangles(); ++t)
      for (int k = 0; k < 3; ++k) {
        nbrs[m.triangles[t][k]].push_back(m.triangles[t][(k + 1) % 3]);
        star[m.triangles[t][k]].push_back(t);
      }
    auto positive = [&](int t) {
      const auto& T = m.triangles[t];
      return m.positions[T[0]].dot(m.positions[T[1]].cross(m.positions[T[2]])) > 0;
    };
    for (int it = 0; it < 6; ++it)
      for (int v = 0; v < m.num_vertices(); ++v) {
        if (out.fixed_mask[v] != 0) continue;
        Vector3d s = Vector3d::Zero();
        for (int w : nbrs[v]) s += m.positions[w];
        const Vector3d old = m.positions[v];
        m.positions[v] = s.normalized();
        for (int t : star[v])
          if (!positive(t)) {
            m.positions[v] = old;
            break;
          }
      }
  }
  finalize_mesh(m);
  std::map<std::pair<int, int>, PanelLabel> seg_label;
  for (const auto& s : segs) seg_label[std::minmax(remap[s.a], remap[s.b])] = pieces[s.piece].label;
  if (seg_label.size() != m.boundary.size())
    throw Error(ErrorCode::InfeasibleResolution, "chamber boundary differs from its panels");
  for (auto& be : m.boundary) {
    auto it = seg_label.find(std::minmax(be.a, be.b));
    if (it == seg_label.end()) throw Error(ErrorCode::InfeasibleResolution, "unexpected chamber boundary edge");
    be.label = it->second;
  }
  if (min_angle_degrees(m) < 1.0) throw Error(ErrorCode::DegenerateTriangle, "chamber mesh has an angle below 1 degree");
  m.descriptor = {{"chamber", G.name()}, {"type", b.str()}, {"h", h}, {"hole_radius", r}};
  return out;
}
}  // namespace

ChamberMesh chamber_mesh(const ReflectionGroup& G, const TypeB& b, double h) {
  check_type(G, b);
  genus_of_type(G, b);
  if (G.kind == GroupKind::Trivial) return chamber_mesh_ma(b.f, h);
  return mesh_domain(G, b, h, false, 0);
}

ChamberMesh chamber_mesh_ma(int a, double h) {
  if (a < 1) throw Error(ErrorCode::InvalidType, "M(a) needs a >= 1");
  TypeB b;
  b.f = a;
  return mesh_domain(trivial_group(), b, h, true, a);
}

AssemblySpec full_assembly(const ReflectionGroup& G) {
  AssemblySpec s;
  for (int i = 1; i <= G.rank(); ++i) s.mirrors.push_back(i);
  s.tau = true;
  return s;
}

SymmetricMesh reflect_assemble(const ChamberMesh& chamber, const AssemblySpec& spec) {
  const ReflectionGroup& G = chamber.group;
  const auto all = enumerate_elements(G);
  const auto ns = mirror_normals(G);
  auto find_matrix = [&](const Eigen::Matrix3d& M) {
    for (std::size_t e = 0; e < all.size(); ++e)
      if ((all[e].matrix - M).cwiseAbs().maxCoeff() < 1e-9) return static_cast<int>(e);
    throw Error(ErrorCode::GluingMismatch, "group element not found");
  };
  for (int i : spec.mirrors)
    if (i < 1 || i > G.rank()) throw Error(ErrorCode::BadIndex, "mirror index out of range");
  // Subgroup generated by the glued mirrors.
  std::vector<int> elems{0};
  std::vector<int> parity{1};
  std::map<int, int> pos{{0, 0}};
  for (std::size_t q = 0; q < elems.size(); ++q)
    for (int i : spec.mirrors) {
      const int e = find_matrix(all[elems[q]].matrix * reflection_matrix(ns[i - 1]));
      if (pos.count(e)) continue;
      pos[e] = static_cast<int>(elems.size());
      elems.push_back(e);
      parity.push_back(-parity[q]);
    }
  const int ng = static_cast<int>(elems.size());
  const int sheets = spec.tau ? 2 : 1;
  const int nc = ng * sheets;
  const SymmetricMesh& cm = chamber.mesh;
  const int nv = cm.num_vertices();
  auto copy_of = [&](int g, int s) { return s * ng + g; };

  std::vector<int> parent(static_cast<std::size_t>(nc) * nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) {
    x = root(x);
    y = root(y);
    if (x != y) parent[std::max(x, y)] = std::min(x, y);
  };
  for (int s = 0; s < sheets; ++s)
    for (int g = 0; g < ng; ++g)
      for (int i : spec.mirrors) {
        const int h = pos.at(find_matrix(all[elems[g]].matrix * reflection_matrix(ns[i - 1])));
        for (int v = 0; v < nv; ++v)
          if (chamber.fixed_mask[v] & (1u << (i - 1))) unite(copy_of(g, s) * nv + v, copy_of(h, s) * nv + v);
      }
  if (spec.tau)
    for (int g = 0; g < ng; ++g)
      for (int v = 0; v < nv; ++v)
        if (chamber.fixed_mask[v] & FixTau) unite(copy_of(g, 0) * nv + v, copy_of(g, 1) * nv + v);

  std::vector<int> id(parent.size(), -1);
  int count = 0;
  for (std::size_t x = 0; x < parent.size(); ++x) {
    const int rt = root(static_cast<int>(x));
    if (id[rt] < 0) id[rt] = count++;
    id[x] = id[rt];
  }

  bool flat_tau = true;
  for (int v = 0; v < nv; ++v)
    if ((chamber.fixed_mask[v] & FixTau) && std::abs(cm.positions[v].z()) > 1e-9) flat_tau = false;

  SymmetricMesh m;
  m.positions.assign(count, Vector3d::Zero());
  for (int s = 0; s < sheets; ++s)
    for (int g = 0; g < ng; ++g)
      for (int v = 0; v < nv; ++v) {
        Vector3d p = all[elems[g]].matrix * cm.positions[v];
        if (s == 1 && flat_tau) p.z() = -p.z();
        m.positions[id[copy_of(g, s) * nv + v]] = p;
      }
  for (int s = 0; s < sheets; ++s)
    for (int g = 0; g < ng; ++g) {
      const bool flip = parity[g] * (s == 1 ? -1 : 1) < 0;
      const int c = copy_of(g, s);
      for (const auto& t : cm.triangles) {
        std::array<int, 3> T{id[c * nv + t[0]], id[c * nv + t[1]], id[c * nv + t[2]]};
        if (flip) std::swap(T[1], T[2]);
        m.triangles.push_back(T);
        m.triangle_chamber.push_back(c);
      }
      for (std::size_t e = 0; e < cm.edges.size(); ++e) {
        const int a = id[c * nv + cm.edges[e][0]], b = id[c * nv + cm.edges[e][1]];
        m.edges.push_back({std::min(a, b), std::max(a, b)});
        m.edge_length.push_back(cm.edge_length[e]);
      }
    }
  // Labels of boundary edges that stay open.
  std::map<std::pair<int, int>, PanelLabel> open;
  for (int c = 0; c < nc; ++c)
    for (const auto& be : cm.boundary) {
      PanelLabel L = be.label;
      const bool glued = (L.kind == PanelLabel::MirrorTau && spec.tau) ||
                         (L.kind == PanelLabel::Mirror &&
                          std::find(spec.mirrors.begin(), spec.mirrors.end(), L.index) != spec.mirrors.end());
      if (glued) continue;
      open[std::minmax(id[c * nv + be.a], id[c * nv + be.b])] = {PanelLabel::Outer, 0};
    }
  finalize_mesh(m);
  for (auto& be : m.boundary) {
    if (!open.count(std::minmax(be.a, be.b))) throw Error(ErrorCode::GluingMismatch, "panel traces do not match");
  }
  if (m.boundary.size() != open.size()) throw Error(ErrorCode::GluingMismatch, "glued panel became a boundary");
  if (!is_manifold(m) || !is_consistently_oriented(m)) throw Error(ErrorCode::GluingMismatch, "assembly is not a manifold");

  // Action by left multiplication on copies; tau swaps sheets.
  std::vector<std::string> names;
  std::vector<std::vector<int>> gens;
  for (int i : spec.mirrors) {
    const Eigen::Matrix3d R = reflection_matrix(ns[i - 1]);
    std::vector<int> perm(count);
    for (int s = 0; s < sheets; ++s)
      for (int g = 0; g < ng; ++g) {
        const int h = pos.at(find_matrix(R * all[elems[g]].matrix));
        for (int v = 0; v < nv; ++v) perm[id[copy_of(g, s) * nv + v]] = id[copy_of(h, s) * nv + v];
      }
    names.push_back("r" + std::to_string(i));
    gens.push_back(std::move(perm));
  }
  if (spec.tau) {
    std::vector<int> perm(count);
    for (int s = 0; s < 2; ++s)
      for (int g = 0; g < ng; ++g)
        for (int v = 0; v < nv; ++v) perm[id[copy_of(g, s) * nv + v]] = id[copy_of(g, 1 - s) * nv + v];
    names.push_back("tau");
    gens.push_back(std::move(perm));
  }
  m.action = GroupAction::generate(count, names, gens, std::vector<int>(gens.size(), -1));
  m.descriptor = {{"group", G.name()}, {"type", chamber.type.str()}, {"copies", nc}};
  return m;
}

SymmetricMesh descriptor_mesh(const SurfaceDescriptor& d, int target_vertices) {
  const ReflectionGroup G = d.effective_group();
  const TypeB b = d.effective_type();
  AssemblySpec spec = full_assembly(G);
  int order = group_order(G);
  if (d.family == Family::BoundedNtau) spec.tau = false;
  if (d.family == Family::BoundedNrho1) {
    spec.mirrors.erase(std::remove(spec.mirrors.begin(), spec.mirrors.end(), 1), spec.mirrors.end());
    order /= 2;
  }
  const int copies = order * (spec.tau ? 2 : 1);
  const double chamber_area = 4 * kPi / group_order(G);
  const int target = std::max(target_vertices, 50);
  double h = std::sqrt(copies * chamber_area / (0.5 * std::sqrt(3.0) * target));
  SymmetricMesh m;
  for (int attempt = 0; attempt < 5; ++attempt) {
    const ChamberMesh c = d.family == Family::ClosedMa ? chamber_mesh_ma(d.a, h) : chamber_mesh(G, b, h);
    m = reflect_assemble(c, spec);
    if (m.num_vertices() >= target) break;
    h *= 0.97 * std::sqrt(static_cast<double>(m.num_vertices()) / target);
  }
  m.descriptor = to_json(d);
  return m;
}

}  // namespace eigenmax
