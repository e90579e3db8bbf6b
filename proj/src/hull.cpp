#include "lpbmk/bodies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

namespace lpbmk {

namespace {

double bbox_scale_2(const std::vector<Vec2>& p) {
  Vec2 lo = p[0], hi = p[0];
  for (const auto& x : p) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return (hi - lo).norm();
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace

template <> Polytope<2> hull<2>(const std::vector<Vec2>& points) {
  if (points.size() < 3) throw std::invalid_argument("hull: need at least 3 points");
  std::vector<Vec2> p = points;
  std::sort(p.begin(), p.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end(),
                      [](const Vec2& a, const Vec2& b) { return a == b; }),
          p.end());
  const double scale = bbox_scale_2(p);
  if (!(scale > 0)) throw std::invalid_argument("hull: degenerate input");
  const double eps = 1e-12 * scale * scale;  // cross products scale like length^2

  // monotone chain, counterclockwise output, collinear points dropped
  std::vector<Vec2> h(2 * p.size());
  std::size_t k = 0;
  for (const auto& pt : p) {  // lower
    while (k >= 2 && cross2(h[k - 2], h[k - 1], pt) <= eps) --k;
    h[k++] = pt;
  }
  const std::size_t lower = k + 1;
  for (auto it = p.rbegin() + 1; it != p.rend(); ++it) {  // upper
    while (k >= lower && cross2(h[k - 2], h[k - 1], *it) <= eps) --k;
    h[k++] = *it;
  }
  h.resize(k - 1);
  if (h.size() < 3) throw std::invalid_argument("hull: points are collinear");

  std::vector<Facet<2>> facets;
  facets.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Vec2& a = h[i];
    const Vec2& b = h[(i + 1) % h.size()];
    const Vec2 d = b - a;
    const double len = d.norm();
    const Vec2 normal = Vec2(d.y(), -d.x()) / len;
    facets.push_back({normal, normal.dot(a), len});
  }
  return Polytope<2>(std::move(h), std::move(facets));
}

namespace {

struct TriFace {
  int a, b, c;
  Vec3 n;       // unit outward
  double off;   // <n, vertex>
  bool alive = true;
};

TriFace make_face(const std::vector<Vec3>& pts, int a, int b, int c, const Vec3& inside) {
  Vec3 n = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double nn = n.norm();
  if (nn <= 0) throw std::invalid_argument("hull: degenerate face");
  n /= nn;
  if (n.dot(pts[a] - inside) < 0) {
    std::swap(b, c);
    n = -n;
  }
  return {a, b, c, n, n.dot(pts[a]), true};
}

double tri_area(const std::vector<Vec3>& pts, const TriFace& f) {
  return 0.5 * (pts[f.b] - pts[f.a]).cross(pts[f.c] - pts[f.a]).norm();
}

struct UF {
  std::vector<int> parent;
  explicit UF(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = int(i);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

template <> Polytope<3> hull<3>(const std::vector<Vec3>& points) {
  if (points.size() < 4) throw std::invalid_argument("hull: need at least 4 points");
  const std::vector<Vec3>& pts = points;
  Vec3 lo = pts[0], hi = pts[0];
  for (const auto& x : pts) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double scale = (hi - lo).norm();
  if (!(scale > 0)) throw std::invalid_argument("hull: degenerate input");
  const double eps = 1e-9 * scale;

  // initial simplex from extreme points
  int i0 = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].x() < pts[i0].x()) i0 = int(i);
  int i1 = -1;
  double best = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = (pts[i] - pts[i0]).norm();
    if (d > best) {
      best = d;
      i1 = int(i);
    }
  }
  if (best <= eps) throw std::invalid_argument("hull: degenerate input");
  const Vec3 dir = (pts[i1] - pts[i0]).normalized();
  int i2 = -1;
  best = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 r = pts[i] - pts[i0];
    const double d = (r - r.dot(dir) * dir).norm();
    if (d > best) {
      best = d;
      i2 = int(i);
    }
  }
  if (best <= eps) throw std::invalid_argument("hull: points are collinear");
  Vec3 pn = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(pn.dot(pts[i] - pts[i0]));
    if (d > best) {
      best = d;
      i3 = int(i);
    }
  }
  if (best <= eps) throw std::invalid_argument("hull: points are coplanar");

  const Vec3 inside = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
  std::vector<TriFace> faces;
  faces.push_back(make_face(pts, i0, i1, i2, inside));
  faces.push_back(make_face(pts, i0, i1, i3, inside));
  faces.push_back(make_face(pts, i0, i2, i3, inside));
  faces.push_back(make_face(pts, i1, i2, i3, inside));

  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[i] = int(i);

  std::vector<int> visible;
  for (int pi : order) {
    if (pi == i0 || pi == i1 || pi == i2 || pi == i3) continue;
    visible.clear();
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (!faces[fi].alive) continue;
      if (faces[fi].n.dot(pts[pi]) - faces[fi].off > eps) visible.push_back(int(fi));
    }
    if (visible.empty()) continue;
    // horizon = edges of visible faces seen exactly once
    std::unordered_map<std::int64_t, std::pair<int, int>> edges;
    auto add_edge = [&](int a, int b) {
      const std::int64_t key =
          (std::int64_t(std::min(a, b)) << 32) | std::int64_t(std::max(a, b));
      auto it = edges.find(key);
      if (it == edges.end())
        edges.emplace(key, std::make_pair(a, b));
      else
        edges.erase(it);
    };
    for (int fi : visible) {
      add_edge(faces[fi].a, faces[fi].b);
      add_edge(faces[fi].b, faces[fi].c);
      add_edge(faces[fi].c, faces[fi].a);
      faces[fi].alive = false;
    }
    for (const auto& [key, e] : edges) {
      (void)key;
      faces.push_back(make_face(pts, e.first, e.second, pi, inside));
    }
  }

  // merge coplanar neighbours into facets
  std::vector<int> alive;
  for (std::size_t fi = 0; fi < faces.size(); ++fi)
    if (faces[fi].alive) alive.push_back(int(fi));
  if (alive.empty()) throw std::invalid_argument("hull: no faces");
  UF uf(alive.size());
  std::unordered_map<std::int64_t, int> edge_owner;
  for (std::size_t k = 0; k < alive.size(); ++k) {
    const TriFace& f = faces[alive[k]];
    const int vs[3] = {f.a, f.b, f.c};
    for (int e = 0; e < 3; ++e) {
      const int a = vs[e], b = vs[(e + 1) % 3];
      const std::int64_t key =
          (std::int64_t(std::min(a, b)) << 32) | std::int64_t(std::max(a, b));
      auto it = edge_owner.find(key);
      if (it == edge_owner.end()) {
        edge_owner[key] = int(k);
      } else {
        const TriFace& g = faces[alive[it->second]];
        if (f.n.dot(g.n) > 1.0 - 1e-9) uf.unite(int(k), it->second);
      }
    }
  }
  std::unordered_map<int, std::vector<int>> groups;
  for (std::size_t k = 0; k < alive.size(); ++k) groups[uf.find(int(k))].push_back(alive[k]);

  std::vector<int> vmap(pts.size(), -1);
  std::vector<Vec3> verts;
  for (int fi : alive) {
    for (int v : {faces[fi].a, faces[fi].b, faces[fi].c}) {
      if (vmap[v] < 0) {
        vmap[v] = int(verts.size());
        verts.push_back(pts[v]);
      }
    }
  }

  std::vector<Facet<3>> facets;
  facets.reserve(groups.size());
  std::vector<int> keys;
  for (const auto& [root, members] : groups) keys.push_back(root);
  std::sort(keys.begin(), keys.end());  // deterministic facet order
  for (int root : keys) {
    const auto& members = groups[root];
    Vec3 n = Vec3::Zero();
    double area = 0.0;
    for (int fi : members) {
      const double a = tri_area(pts, faces[fi]);
      n += a * faces[fi].n;
      area += a;
    }
    n.normalize();
    double off = -1e300;
    for (int fi : members)
      for (int v : {faces[fi].a, faces[fi].b, faces[fi].c})
        off = std::max(off, n.dot(pts[v]));
    facets.push_back({n, off, area});
  }
  return Polytope<3>(std::move(verts), std::move(facets));
}

template <int N> double Polytope<N>::support(const Vec<N>& v) const {
  double best = -1e300;
  for (const auto& x : verts_) best = std::max(best, v.dot(x));
  return best;
}

template <int N> Vec<N> Polytope<N>::support_point(const Vec<N>& v) const {
  std::size_t bi = 0;
  double best = -1e300;
  for (std::size_t i = 0; i < verts_.size(); ++i) {
    const double d = v.dot(verts_[i]);
    if (d > best) {
      best = d;
      bi = i;
    }
  }
  return verts_[bi];
}

template <int N> double Polytope<N>::radial(const Vec<N>& v) const {
  double best = 1e300;
  for (const auto& f : facets_) {
    if (f.offset <= 0)
      throw std::domain_error("radial: origin not interior");
    const double d = f.normal.dot(v);
    if (d > 1e-15) best = std::min(best, f.offset / d);
  }
  if (best >= 1e300) throw std::domain_error("radial: unbounded direction");
  return best;
}

template <int N> double Polytope<N>::volume() const {
  double s = 0.0;
  for (const auto& f : facets_) s += f.offset * f.area;
  return s / N;
}

template class Polytope<2>;
template class Polytope<3>;

}  // namespace lpbmk
