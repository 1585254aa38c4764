#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "cmc/error.hpp"

namespace cmc::detail {
namespace {

constexpr int kGhost = -1;

struct Tri {
  std::array<int, 3> v;
  std::array<int, 3> nbr;  // nbr[i] lies across the edge opposite v[i]
  bool alive = true;
};

long double orient_ld(const Point& a, const Point& b, const Point& c) {
  const long double abx = static_cast<long double>(b.x()) - a.x();
  const long double aby = static_cast<long double>(b.y()) - a.y();
  const long double acx = static_cast<long double>(c.x()) - a.x();
  const long double acy = static_cast<long double>(c.y()) - a.y();
  return abx * acy - aby * acx;
}

// Positive when d lies inside the circumcircle of the counterclockwise a, b, c.
long double incircle(const Point& a, const Point& b, const Point& c,
                     const Point& d) {
  const long double adx = static_cast<long double>(a.x()) - d.x();
  const long double ady = static_cast<long double>(a.y()) - d.y();
  const long double bdx = static_cast<long double>(b.x()) - d.x();
  const long double bdy = static_cast<long double>(b.y()) - d.y();
  const long double cdx = static_cast<long double>(c.x()) - d.x();
  const long double cdy = static_cast<long double>(c.y()) - d.y();
  const long double ad = adx * adx + ady * ady;
  const long double bd = bdx * bdx + bdy * bdy;
  const long double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
         ad * (bdx * cdy - bdy * cdx);
}

class Triangulator {
 public:
  explicit Triangulator(std::span<const Point> pts) : pts_(pts) {}

  std::vector<std::array<int, 3>> run() {
    const int n = static_cast<int>(pts_.size());
    if (n < 3) fail(ErrorKind::MeshQualityFailure, "delaunay: fewer than 3 points");
    seed_triangle();
    for (int i = 0; i < n; ++i)
      if (!inserted_[i]) insert(i);
    std::vector<std::array<int, 3>> out;
    for (const Tri& t : tris_)
      if (t.alive && !is_ghost(t)) out.push_back(t.v);
    return out;
  }

 private:
  static bool is_ghost(const Tri& t) {
    return t.v[0] == kGhost || t.v[1] == kGhost || t.v[2] == kGhost;
  }

  const Point& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

  void seed_triangle() {
    const int n = static_cast<int>(pts_.size());
    inserted_.assign(static_cast<std::size_t>(n), false);
    double extent = 0.0;
    for (const Point& p : pts_)
      extent = std::max(extent, (p - pts_[0]).lpNorm<Eigen::Infinity>());
    int a = 0, b = -1, c = -1;
    for (int i = 1; i < n && b < 0; ++i)
      if ((P(i) - P(a)).norm() > 1e-12 * extent) b = i;
    if (b < 0) fail(ErrorKind::MeshQualityFailure, "delaunay: all points coincide");
    for (int i = 1; i < n && c < 0; ++i)
      if (i != b && std::abs(static_cast<double>(orient_ld(P(a), P(b), P(i)))) >
                        1e-10 * extent * extent)
        c = i;
    if (c < 0) fail(ErrorKind::MeshQualityFailure, "delaunay: all points collinear");
    if (orient_ld(P(a), P(b), P(c)) < 0) std::swap(b, c);
    inserted_[a] = inserted_[b] = inserted_[c] = true;

    // Solid triangle 0 plus one ghost per hull edge; ghost (y, x, inf) sits
    // outside the solid edge x -> y.
    tris_.push_back({{a, b, c}, {2, 3, 1}});
    tris_.push_back({{b, a, kGhost}, {2, 3, 0}});  // outside a->b
    tris_.push_back({{c, b, kGhost}, {3, 1, 0}});  // outside b->c
    tris_.push_back({{a, c, kGhost}, {1, 2, 0}});  // outside c->a
    fix_all_links();
    last_ = 0;
  }

  // Rebuilds neighbor links of every live triangle from scratch. Only used
  // for the four seed triangles.
  void fix_all_links() {
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
      for (int i = 0; i < 3; ++i) {
        const int u = tris_[t].v[(i + 1) % 3], w = tris_[t].v[(i + 2) % 3];
        const auto key = std::minmax(u, w);
        auto it = edges.find(key);
        if (it == edges.end()) {
          edges.emplace(key, std::make_pair(t, i));
        } else {
          tris_[t].nbr[i] = it->second.first;
          tris_[it->second.first].nbr[it->second.second] = t;
        }
      }
  }

  bool in_circle(const Tri& t, const Point& p) const {
    for (int g = 0; g < 3; ++g) {
      if (t.v[g] != kGhost) continue;
      const Point& x = P(t.v[(g + 1) % 3]);
      const Point& y = P(t.v[(g + 2) % 3]);
      const long double o = orient_ld(x, y, p);
      if (o > 0) return true;
      if (o < 0) return false;
      const Point xy = y - x;
      const double s = (p - x).dot(xy);
      return s > 0 && s < xy.squaredNorm();
    }
    return incircle(P(t.v[0]), P(t.v[1]), P(t.v[2]), p) > 0;
  }

  int locate(const Point& p) const {
    int t = last_;
    const std::size_t limit = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tri& tri = tris_[t];
      if (is_ghost(tri)) {
        if (in_circle(tri, p)) return t;
        break;
      }
      int next = -1;
      for (int k = 0; k < 3; ++k) {
        const int i = static_cast<int>((k + step) % 3);
        if (orient_ld(P(tri.v[(i + 1) % 3]), P(tri.v[(i + 2) % 3]), p) < 0) {
          next = tri.nbr[i];
          break;
        }
      }
      if (next < 0) return t;
      t = next;
    }
    for (int k = 0; k < static_cast<int>(tris_.size()); ++k)
      if (tris_[k].alive && in_circle(tris_[k], p)) return k;
    fail(ErrorKind::MeshQualityFailure, "delaunay: point location failed");
  }

  void insert(int pi) {
    const Point& p = P(pi);
    const int seed = locate(p);

    ++stamp_;
    mark_.resize(tris_.size(), 0);
    auto in_cavity = [&](int t) { return mark_[t] == stamp_; };
    std::vector<int> cavity{seed};
    mark_[seed] = stamp_;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const Tri& t = tris_[cavity[k]];
      for (int nb : t.nbr)
        if (!in_cavity(nb) && in_circle(tris_[nb], p)) {
          mark_[nb] = stamp_;
          cavity.push_back(nb);
        }
    }

    // Star-shape repair: drop cavity triangles whose boundary edge would give
    // a non-positive new triangle (round-off on near-cocircular input).
    struct Edge {
      int u, w, outside, owner;
    };
    std::vector<Edge> boundary;
    for (bool changed = true; changed;) {
      changed = false;
      boundary.clear();
      for (int c : cavity) {
        if (!in_cavity(c)) continue;
        const Tri& t = tris_[c];
        for (int i = 0; i < 3; ++i) {
          if (in_cavity(t.nbr[i])) continue;
          const int u = t.v[(i + 1) % 3], w = t.v[(i + 2) % 3];
          if (c != seed && u != kGhost && w != kGhost && orient_ld(P(u), P(w), p) <= 0) {
            mark_[c] = 0;
            changed = true;
            break;
          }
          boundary.push_back({u, w, t.nbr[i], c});
        }
        if (changed) break;
      }
    }

    for (int c : cavity)
      if (in_cavity(c)) tris_[c].alive = false;

    std::map<std::pair<int, int>, std::pair<int, int>> open;
    for (const Edge& e : boundary) {
      const int id = static_cast<int>(tris_.size());
      Tri t{{e.u, e.w, pi}, {-1, -1, e.outside}};
      tris_.push_back(t);
      Tri& out = tris_[e.outside];
      for (int j = 0; j < 3; ++j)
        if (out.v[j] != e.u && out.v[j] != e.w) out.nbr[j] = id;
      // Edges (w, p) opposite u and (p, u) opposite w pair with siblings.
      const std::array<std::pair<int, int>, 2> sides{
          std::make_pair(e.w, 0), std::make_pair(e.u, 1)};
      for (const auto& [other, slot] : sides) {
        const auto key = std::minmax(other, pi);
        auto it = open.find(key);
        if (it == open.end()) {
          open.emplace(key, std::make_pair(id, slot));
        } else {
          tris_[id].nbr[slot] = it->second.first;
          tris_[it->second.first].nbr[it->second.second] = id;
          open.erase(it);
        }
      }
      last_ = id;
    }
    if (!open.empty())
      fail(ErrorKind::MeshQualityFailure, "delaunay: cavity boundary is not a closed loop");
    inserted_[pi] = true;
    if (is_ghost(tris_[last_]))
      for (int k = static_cast<int>(tris_.size()) - 1; k >= 0; --k)
        if (tris_[k].alive && !is_ghost(tris_[k])) {
          last_ = k;
          break;
        }
  }

  std::span<const Point> pts_;
  std::vector<Tri> tris_;
  std::vector<bool> inserted_;
  std::vector<int> mark_;
  int stamp_ = 0;
  int last_ = 0;
};

}  // namespace

double orient(const Point& a, const Point& b, const Point& c) {
  return static_cast<double>(orient_ld(a, b, c));
}

std::vector<std::array<int, 3>> delaunay(std::span<const Point> points) {
  return Triangulator(points).run();
}

}  // namespace cmc::detail
