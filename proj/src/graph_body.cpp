#include "lpbmk/bodies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>

namespace lpbmk {

namespace {

std::mutex g_mesh_mu;

// Sutherland-Hodgman against a convex CCW clipper
std::vector<Vec2> clip_convex(std::vector<Vec2> poly, const std::vector<Vec2>& clipper) {
  for (std::size_t i = 0; i < clipper.size() && !poly.empty(); ++i) {
    const Vec2 a = clipper[i];
    const Vec2 d = clipper[(i + 1) % clipper.size()] - a;
    auto side = [&](const Vec2& x) {
      return d.x() * (x.y() - a.y()) - d.y() * (x.x() - a.x());
    };
    std::vector<Vec2> out;
    out.reserve(poly.size() + 2);
    for (std::size_t j = 0; j < poly.size(); ++j) {
      const Vec2 P = poly[j], Q = poly[(j + 1) % poly.size()];
      const double sp = side(P), sq = side(Q);
      if (sp >= 0) out.push_back(P);
      if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0))
        out.push_back(P + (sp / (sp - sq)) * (Q - P));
    }
    poly = std::move(out);
  }
  return poly;
}

double poly_area_centroid(const std::vector<Vec2>& P, Vec2& centroid) {
  double A = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec2& a = P[i];
    const Vec2& b = P[(i + 1) % P.size()];
    const double cr = a.x() * b.y() - b.x() * a.y();
    A += cr;
    c += cr * (a + b);
  }
  A *= 0.5;
  if (std::abs(A) > 0) centroid = c / (6.0 * A);
  return A;
}

}  // namespace

template <>
BaseMesh<2> make_base_mesh<2>(const std::vector<Vec<1>>& base, int level) {
  if (base.size() < 2) throw std::invalid_argument("base mesh: interval needs endpoints");
  double lo = base[0][0], hi = base[0][0];
  for (const auto& x : base) {
    lo = std::min(lo, x[0]);
    hi = std::max(hi, x[0]);
  }
  BaseMesh<2> M;
  M.level = level;
  const int m = 1 << (2 * level);
  const double h = (hi - lo) / m;
  M.cells.reserve(m);
  for (int i = 0; i < m; ++i) {
    Vec<1> c;
    c[0] = lo + (i + 0.5) * h;
    M.cells.push_back({c, h});
  }
  for (int i = 0; i <= 16; ++i) {
    Vec<1> x;
    x[0] = lo + (hi - lo) * i / 16.0;
    M.points.push_back(x);
  }
  return M;
}

template <>
BaseMesh<3> make_base_mesh<3>(const std::vector<Vec2>& base, int level) {
  if (base.size() < 3) throw std::invalid_argument("base mesh: polygon needs 3+ vertices");
  Vec2 lo = base[0], hi = base[0];
  for (const auto& v : base) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  BaseMesh<3> M;
  M.level = level;
  const int g = 1 << level;
  const Vec2 span = hi - lo;
  const double cell_w = span.x() / g, cell_h = span.y() / g;
  const double drop = 1e-14 * cell_w * cell_h;
  M.cells.reserve(std::size_t(2) * g * g);
  for (int iy = 0; iy < g; ++iy) {
    for (int ix = 0; ix < g; ++ix) {
      const Vec2 p00(lo.x() + ix * cell_w, lo.y() + iy * cell_h);
      const Vec2 p10(p00.x() + cell_w, p00.y());
      const Vec2 p01(p00.x(), p00.y() + cell_h);
      const Vec2 p11(p00.x() + cell_w, p00.y() + cell_h);
      const std::vector<Vec2> tris[2] = {{p00, p10, p11}, {p00, p11, p01}};
      for (const auto& tri : tris) {
        const std::vector<Vec2> cp = clip_convex(tri, base);
        if (cp.size() < 3) continue;
        Vec2 c;
        const double A = poly_area_centroid(cp, c);
        if (A <= drop) continue;
        M.cells.push_back({c, A});
      }
    }
  }
  M.points = base;
  const int pg = 8;
  const double margin = -1e-9 * span.norm();  // negative eps = strictly inside
  for (int iy = 1; iy < pg; ++iy)
    for (int ix = 1; ix < pg; ++ix) {
      const Vec2 x(lo.x() + span.x() * ix / pg, lo.y() + span.y() * iy / pg);
      if (point_in_convex_polygon(base, x, margin)) M.points.push_back(x);
    }
  return M;
}

template <int N>
std::shared_ptr<const BaseMesh<N>> GraphBody<N>::ensure_mesh(int level) const {
  std::lock_guard<std::mutex> lock(g_mesh_mu);
  if (mesh && mesh->level >= level) return mesh;
  mesh = std::make_shared<const BaseMesh<N>>(make_base_mesh<N>(base, level));
  return mesh;
}

template std::shared_ptr<const BaseMesh<2>> GraphBody<2>::ensure_mesh(int) const;
template std::shared_ptr<const BaseMesh<3>> GraphBody<3>::ensure_mesh(int) const;

namespace {

template <int N> double base_scale(const std::vector<Vec<N - 1>>& base) {
  Vec<N - 1> lo = base[0], hi = base[0];
  for (const auto& v : base) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

template <int N>
bool in_base(const std::vector<Vec<N - 1>>& base, const Vec<N - 1>& x, double eps) {
  if constexpr (N == 2) {
    double lo = base[0][0], hi = base[0][0];
    for (const auto& v : base) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    return x[0] >= lo - eps && x[0] <= hi + eps;
  } else {
    return point_in_convex_polygon(base, x, eps);
  }
}

}  // namespace

// nearest feasible point, good enough for sliding a search along the boundary
template <int N>
Vec<N - 1> clamp_to_base(const std::vector<Vec<N - 1>>& base, Vec<N - 1> x) {
  if constexpr (N == 2) {
    double lo = base[0][0], hi = base[0][0];
    for (const auto& v : base) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    x[0] = std::min(std::max(x[0], lo), hi);
    return x;
  } else {
    for (int pass = 0; pass < 3; ++pass) {
      for (std::size_t i = 0; i < base.size(); ++i) {
        const Vec2& a = base[i];
        const Vec2 d = base[(i + 1) % base.size()] - a;
        const double len = d.norm();
        if (len < 1e-300) continue;
        const Vec2 n(d.y() / len, -d.x() / len);  // outward for CCW
        const double viol = n.dot(x - a);
        if (viol > 0) x -= viol * n;
      }
    }
    return x;
  }
}

template Vec<1> clamp_to_base<2>(const std::vector<Vec<1>>&, Vec<1>);
template Vec<2> clamp_to_base<3>(const std::vector<Vec<2>>&, Vec<2>);

namespace {

// shared wrapper enforcing the evaluator domain
template <int N> struct BaseDomain {
  std::vector<Vec<N - 1>> base;
  double eps;
  void check(const Vec<N - 1>& x) const {
    if (!in_base<N>(base, x, eps))
      throw std::domain_error("graph evaluator: point outside base");
  }
};

}  // namespace

template <int N>
double graph_support(const GraphBody<N>& K, const Vec<N>& v, Vec<N>* point, int) {
  using BV = Vec<N - 1>;
  if (K.gauge && K.gauge->support_point) {
    const Vec<N> sp = K.gauge->support_point(v);
    if (point) *point = sp;
    return sp.dot(v);
  }
  const double du = v.dot(K.u);
  const BV vperp = K.frame.transpose() * v;
  const bool upper = du >= 0;
  const auto& h = upper ? K.f : K.g;
  auto psi = [&](const BV& x) { return vperp.dot(x) + du * h(x); };

  const double scale = std::max(base_scale<N>(K.base), 1e-12);
  const double eps = 1e-12 * scale;

  // start from the best base vertex (objective is concave, any start works)
  BV bx = K.base[0];
  double best = psi(bx);
  const std::size_t stride = std::max<std::size_t>(1, K.base.size() / 48);
  for (std::size_t i = stride; i < K.base.size(); i += stride) {
    const double val = psi(K.base[i]);
    if (val > best) {
      best = val;
      bx = K.base[i];
    }
  }
  BV centroid = BV::Zero();
  for (const auto& p : K.base) centroid += p;
  centroid /= double(K.base.size());
  if (const double val = psi(centroid); val > best) {
    best = val;
    bx = centroid;
  }

  std::vector<BV> dirs;
  if constexpr (N == 2) {
    BV d;
    d[0] = 1;
    dirs = {d, BV(-d)};
  } else {
    dirs = {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1),  Vec2(0, -1),
            Vec2(1, 1), Vec2(1, -1), Vec2(-1, 1), Vec2(-1, -1)};
    for (auto& d : dirs) d.normalize();
  }

  double step = 0.25 * scale;
  const double minstep = 1e-10 * scale;
  while (step > minstep) {
    bool moved = false;
    for (const auto& d : dirs) {
      BV cand = bx + step * d;
      if (!in_base<N>(K.base, cand, eps)) {
        cand = clamp_to_base<N>(K.base, cand);  // slide along the boundary
        if ((cand - bx).norm() < 0.01 * step) continue;
      }
      const double val = psi(cand);
      if (val > best) {
        best = val;
        bx = cand;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  if (point) *point = K.ambient(bx, h(bx));
  return best;
}

template <int N> double graph_radial(const GraphBody<N>& K, const Vec<N>& v) {
  if (K.gauge) {
    // gauge values are positively homogeneous only for origin-symmetric
    // constructions; solve along the ray instead of assuming it
    const auto& Phi = K.gauge->value;
    double hi = 1.0, lo = 0.0;
    int guard = 0;
    while (Phi(Vec<N>(hi * v)) < 1.0) {
      lo = hi;
      hi *= 2.0;
      if (++guard > 200) throw std::domain_error("radial: ray never leaves the body");
    }
    while (hi - lo > 1e-14 * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (Phi(Vec<N>(mid * v)) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  const double scale = base_scale<N>(K.base);
  auto inside = [&](double t) {
    const Vec<N> x = t * v;
    const Vec<N - 1> xp = K.project(x);
    if (!in_base<N>(K.base, xp, 1e-13 * scale)) return false;
    const double s = x.dot(K.u);
    return s <= K.f(xp) + 1e-13 * scale && s >= K.g(xp) - 1e-13 * scale;
  };
  if (!inside(0.0)) throw std::domain_error("radial: origin not interior");
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (inside(hi)) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw std::domain_error("radial: ray never leaves the body");
  }
  while (hi - lo > 1e-14 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// outward horizontal normal of the wall segment nearest to xp
template <int N>
Vec<N> wall_normal(const GraphBody<N>& K, const Vec<N - 1>& xp) {
  if constexpr (N == 2) {
    double lo = K.base[0][0], hi = K.base[0][0];
    for (const auto& v : K.base) {
      lo = std::min(lo, v[0]);
      hi = std::max(hi, v[0]);
    }
    const double side = (xp[0] - lo < hi - xp[0]) ? -1.0 : 1.0;
    return Vec<N>(side * K.frame.col(0));
  } else {
    double best = std::numeric_limits<double>::infinity();
    Vec2 n(1, 0);
    for (std::size_t i = 0; i < K.base.size(); ++i) {
      const Vec2& a = K.base[i];
      const Vec2 d = K.base[(i + 1) % K.base.size()] - a;
      const double len2 = d.squaredNorm();
      if (len2 < 1e-300) continue;
      const double t = std::clamp(d.dot(xp - a) / len2, 0.0, 1.0);
      const double dist = (xp - (a + t * d)).norm();
      if (dist < best) {
        best = dist;
        n = Vec2(d.y(), -d.x()).normalized();  // outward for CCW
      }
    }
    return Vec<N>(K.frame * n);
  }
}

}  // namespace

template <int N>
void graph_surface_measure(const GraphBody<N>& K, const MeasureOptions& opt,
                           SurfaceMeasure<N>& out) {
  out.atomic = false;
  const SphereGrid<N> g = sphere_grid<N>(opt.sphere_level);
  out.elems.reserve(g.size());
  if (K.gauge) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec<N>& w = g.nodes[i];
      const double rho = graph_radial(K, w);
      const Vec<N> x = rho * w;
      const Vec<N> nu = K.gauge->grad(x).normalized();
      const double cosang = w.dot(nu);
      if (cosang <= 1e-12)
        throw std::domain_error("surface measure: radial map degenerate (origin interior?)");
      out.elems.push_back(
          {x, nu, std::pow(rho, double(N - 1)) / cosang * g.weights[i]});
    }
    return;
  }
  // Same radial map from the graph primitives.  The sphere parameterization
  // keeps the rim, where the graph gradient blows up, a regular region; a
  // base-mesh rule would lose the divergent Jacobian mass there.
  const double scale = std::max(base_scale<N>(K.base), 1e-12);
  Vec<N - 1> center = Vec<N - 1>::Zero();
  for (const auto& v : K.base) center += v;
  center /= double(K.base.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec<N>& w = g.nodes[i];
    const double rho = graph_radial(K, w);
    const Vec<N> x = rho * w;
    const Vec<N - 1> xp = clamp_to_base<N>(K.base, K.project(x));
    const double s = x.dot(K.u);
    const double fx = K.f(xp), gx = K.g(xp);
    const double df = std::abs(fx - s), dg = std::abs(s - gx);
    Vec<N> nu;
    if (std::min(df, dg) > 1e-7 * (scale + std::abs(fx) + std::abs(gx))) {
      nu = wall_normal<N>(K, xp);
    } else {
      // gradients may diverge on the rim itself; evaluate a hair inside
      const Vec<N - 1> xin = center + (1.0 - 1e-9) * (xp - center);
      if (df <= dg)
        nu = Vec<N>((K.u - K.frame * K.fgrad(xin)).normalized());
      else
        nu = Vec<N>((K.frame * K.ggrad(xin) - K.u).normalized());
    }
    const double cosang = w.dot(nu);
    if (cosang <= 1e-12)
      throw std::domain_error("surface measure: radial map degenerate (origin interior?)");
    out.elems.push_back(
        {x, nu, std::pow(rho, double(N - 1)) / cosang * g.weights[i]});
  }
}

namespace {

// largest root of tau(s)=1 left of s_hi, tau convex increasing through the
// root; Newton from the right converges monotonically
template <class F, class DF>
double newton_upper_root(F&& tau, DF&& dtau, double s_hi, double scale, bool* ok) {
  double s = s_hi;
  for (int it = 0; it < 80; ++it) {
    const double t = tau(s) - 1.0;
    const double d = dtau(s);
    if (!(d > 1e-300)) break;  // flat slope, fall back
    const double ns = s - t / d;
    if (ns < s_hi - 10.0 * scale) break;  // ran away: no chord here
    const bool done = std::abs(ns - s) < 1e-15 * scale;
    s = ns;
    if (done) break;
  }
  *ok = std::abs(tau(s) - 1.0) < 1e-11;
  return s;
}

}  // namespace

template <int N>
GraphBody<N> graph_body_from_gauge(std::shared_ptr<const Gauge<N>> gauge,
                                   const Vec<N>& u0, int base_samples) {
  if (!gauge || !gauge->value || !gauge->grad || !gauge->support_point)
    throw std::invalid_argument("graph body: gauge needs value, grad, support_point");
  GraphBody<N> K;
  K.u = u0.normalized();
  K.frame = orthonormal_frame<N>(K.u);
  K.gauge = gauge;

  const double hu = gauge->support_point(K.u).dot(K.u);
  const double hmu = gauge->support_point(Vec<N>(-K.u)).dot(K.u);
  const double sscale = std::max(hu - hmu, 1e-12);

  if constexpr (N == 2) {
    const Vec2 d = K.frame.col(0);
    Vec<1> a, b;
    a[0] = K.project(gauge->support_point(Vec2(-d)))[0];
    b[0] = K.project(gauge->support_point(d))[0];
    K.base = {a, b};
  } else {
    const int m = std::max(8, base_samples);
    K.base.reserve(m);
    double prev_x = 0, prev_y = 0;
    for (int j = 0; j < m; ++j) {
      const double psi = 2.0 * pi * j / m;
      const Vec3 d = std::cos(psi) * K.frame.col(0) + std::sin(psi) * K.frame.col(1);
      const Vec2 xp = K.project(gauge->support_point(d));
      if (j > 0 && (xp - Vec2(prev_x, prev_y)).norm() < 1e-12 * sscale) continue;
      K.base.push_back(xp);
      prev_x = xp.x();
      prev_y = xp.y();
    }
  }

  const auto g_ptr = gauge;
  const Vec<N> u = K.u;
  const Eigen::Matrix<double, N, N - 1> frame = K.frame;

  auto chord_end = [g_ptr, u, frame, hu, hmu, sscale](const Vec<N - 1>& x,
                                                      bool upper) -> double {
    const Vec<N> x0 = frame * x;
    const double sgn = upper ? 1.0 : -1.0;
    auto tau = [&](double s) { return g_ptr->value(Vec<N>(x0 + (sgn * s) * u)); };
    auto dtau = [&](double s) {
      return sgn * g_ptr->grad(Vec<N>(x0 + (sgn * s) * u)).dot(u);
    };
    const double shi = (upper ? hu : -hmu) + 1e-9 * sscale;
    bool ok = false;
    double s = newton_upper_root(tau, dtau, shi, sscale, &ok);
    if (!ok) {
      // rim or degenerate chord: locate the minimizer along s, then bisect
      double a = upper ? hmu : -hu, b = shi;
      for (int it = 0; it < 80 && b - a > 1e-15 * sscale; ++it) {
        const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
        if (tau(m1) < tau(m2))
          b = m2;
        else
          a = m1;
      }
      const double smin = 0.5 * (a + b);
      if (tau(smin) > 1.0) return sgn * smin;  // chord collapsed to a point
      double lo = smin, hi = shi;
      while (hi - lo > 1e-14 * sscale) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (tau(mid) <= 1.0 ? lo : hi) = mid;
      }
      s = 0.5 * (lo + hi);
    }
    return sgn * s;
  };

  auto dom = std::make_shared<BaseDomain<N>>(
      BaseDomain<N>{K.base, 1e-9 * std::max(base_scale<N>(K.base), 1e-12)});
  K.f = [chord_end, dom](const Vec<N - 1>& x) {
    dom->check(x);
    return chord_end(x, true);
  };
  K.g = [chord_end, dom](const Vec<N - 1>& x) {
    dom->check(x);
    return chord_end(x, false);
  };

  auto implicit_grad = [g_ptr, u, frame](const Vec<N - 1>& x, double s) {
    const Vec<N> G = g_ptr->grad(Vec<N>(frame * x + s * u));
    const double den = G.dot(u);
    const double safe = (std::abs(den) < 1e-12) ? (den < 0 ? -1e-12 : 1e-12) : den;
    return Vec<N - 1>(-(frame.transpose() * G) / safe);
  };
  auto f_fn = K.f;
  auto g_fn = K.g;
  K.fgrad = [implicit_grad, f_fn](const Vec<N - 1>& x) {
    return implicit_grad(x, f_fn(x));
  };
  K.ggrad = [implicit_grad, g_fn](const Vec<N - 1>& x) {
    return implicit_grad(x, g_fn(x));
  };
  return K;
}

template GraphBody<2> graph_body_from_gauge<2>(std::shared_ptr<const Gauge<2>>,
                                               const Vec2&, int);
template GraphBody<3> graph_body_from_gauge<3>(std::shared_ptr<const Gauge<3>>,
                                               const Vec3&, int);

template <int N>
GraphBody<N> graph_functions(const Body<N>& K, const Vec<N>& u0, int base_samples) {
  const Vec<N> u = u0.normalized();
  return std::visit(
      [&](const auto& b) -> GraphBody<N> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Polytope<N>>) {
          GraphBody<N> G;
          G.u = u;
          G.frame = orthonormal_frame<N>(u);
          std::vector<Vec<N - 1>> proj;
          proj.reserve(b.vertices().size());
          for (const auto& v : b.vertices()) proj.push_back(G.frame.transpose() * v);
          if constexpr (N == 2) {
            double lo = proj[0][0], hi = proj[0][0];
            for (const auto& x : proj) {
              lo = std::min(lo, x[0]);
              hi = std::max(hi, x[0]);
            }
            Vec<1> a, c;
            a[0] = lo;
            c[0] = hi;
            G.base = {a, c};
          } else {
            G.base = hull<2>(proj).vertices();
          }
          // graphs: min/max over facets tilted toward/away from u,
          // ties broken by the lowest facet index
          struct Plane {
            Vec<N - 1> bn;
            double du, off;
          };
          auto up = std::make_shared<std::vector<Plane>>();
          auto dn = std::make_shared<std::vector<Plane>>();
          for (const auto& fc : b.facets()) {
            const double du = fc.normal.dot(u);
            const Vec<N - 1> bn = G.frame.transpose() * fc.normal;
            if (du > 1e-11) up->push_back({bn, du, fc.offset});
            if (du < -1e-11) dn->push_back({bn, du, fc.offset});
          }
          if (up->empty() || dn->empty())
            throw std::invalid_argument("graph functions: polytope unbounded along u");
          auto dom = std::make_shared<BaseDomain<N>>(
              BaseDomain<N>{G.base, 1e-9 * std::max(base_scale<N>(G.base), 1e-12)});
          G.f = [up, dom](const Vec<N - 1>& x) {
            dom->check(x);
            double best = ((*up)[0].off - (*up)[0].bn.dot(x)) / (*up)[0].du;
            for (std::size_t i = 1; i < up->size(); ++i) {
              const double v = ((*up)[i].off - (*up)[i].bn.dot(x)) / (*up)[i].du;
              if (v < best) best = v;
            }
            return best;
          };
          G.g = [dn, dom](const Vec<N - 1>& x) {
            dom->check(x);
            double best = ((*dn)[0].off - (*dn)[0].bn.dot(x)) / (*dn)[0].du;
            for (std::size_t i = 1; i < dn->size(); ++i) {
              const double v = ((*dn)[i].off - (*dn)[i].bn.dot(x)) / (*dn)[i].du;
              if (v > best) best = v;
            }
            return best;
          };
          G.fgrad = [up](const Vec<N - 1>& x) {
            std::size_t k = 0;
            double best = ((*up)[0].off - (*up)[0].bn.dot(x)) / (*up)[0].du;
            for (std::size_t i = 1; i < up->size(); ++i) {
              const double v = ((*up)[i].off - (*up)[i].bn.dot(x)) / (*up)[i].du;
              if (v < best) {
                best = v;
                k = i;
              }
            }
            return Vec<N - 1>(-(*up)[k].bn / (*up)[k].du);
          };
          G.ggrad = [dn](const Vec<N - 1>& x) {
            std::size_t k = 0;
            double best = ((*dn)[0].off - (*dn)[0].bn.dot(x)) / (*dn)[0].du;
            for (std::size_t i = 1; i < dn->size(); ++i) {
              const double v = ((*dn)[i].off - (*dn)[i].bn.dot(x)) / (*dn)[i].du;
              if (v > best) {
                best = v;
                k = i;
              }
            }
            return Vec<N - 1>(-(*dn)[k].bn / (*dn)[k].du);
          };
          return G;
        } else if constexpr (std::is_same_v<T, Ellipsoid<N>>) {
          auto gauge = std::make_shared<Gauge<N>>(ellipsoid_gauge<N>(b));
          return graph_body_from_gauge<N>(gauge, u, base_samples);
        } else {
          if (b.gauge) return graph_body_from_gauge<N>(b.gauge, u, base_samples);
          if ((b.u - u).norm() < 1e-12) return b;
          throw std::invalid_argument(
              "graph functions: raw graph body cannot be re-graphed along a new direction");
        }
      },
      K);
}

template GraphBody<2> graph_functions<2>(const Body<2>&, const Vec2&, int);
template GraphBody<3> graph_functions<3>(const Body<3>&, const Vec3&, int);

template <int N> Body<N> steiner(const Body<N>& K, const Vec<N>& u, int base_samples) {
  GraphBody<N> Gb = graph_functions<N>(K, u, base_samples);
  GraphBody<N> S;
  S.u = Gb.u;
  S.frame = Gb.frame;
  S.base = Gb.base;
  S.mesh = Gb.mesh;
  auto f = Gb.f, g = Gb.g;
  auto fg = Gb.fgrad, gg = Gb.ggrad;
  S.f = [f, g](const Vec<N - 1>& x) { return 0.5 * (f(x) - g(x)); };
  S.g = [f, g](const Vec<N - 1>& x) { return 0.5 * (g(x) - f(x)); };
  S.fgrad = [fg, gg](const Vec<N - 1>& x) { return Vec<N - 1>(0.5 * (fg(x) - gg(x))); };
  S.ggrad = [fg, gg](const Vec<N - 1>& x) { return Vec<N - 1>(0.5 * (gg(x) - fg(x))); };
  return S;
}

template Body<2> steiner<2>(const Body<2>&, const Vec2&, int);
template Body<3> steiner<3>(const Body<3>&, const Vec3&, int);

#define LPBMK_INSTANTIATE(N)                                                           \
  template double graph_support<N>(const GraphBody<N>&, const Vec<N>&, Vec<N>*, int); \
  template double graph_radial<N>(const GraphBody<N>&, const Vec<N>&);                \
  template void graph_surface_measure<N>(const GraphBody<N>&, const MeasureOptions&,  \
                                         SurfaceMeasure<N>&);

LPBMK_INSTANTIATE(2)
LPBMK_INSTANTIATE(3)
#undef LPBMK_INSTANTIATE

}  // namespace lpbmk
