#include "lpbmk/bodies.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lpbmk {

template <int N> Ellipsoid<N>::Ellipsoid(const Mat<N>& A) {
  if ((A - A.transpose()).norm() > 1e-12 * (A.norm() + 1.0))
    throw std::invalid_argument("ellipsoid: matrix must be symmetric");
  const Mat<N> S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat<N>> es(S);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("ellipsoid: matrix must be positive definite");
  A_ = S;
  Ainv_ = es.eigenvectors() *
          es.eigenvalues().cwiseInverse().asDiagonal() *
          es.eigenvectors().transpose();
  det_ = es.eigenvalues().prod();
}

template class Ellipsoid<2>;
template class Ellipsoid<3>;

template <> Eigen::Matrix<double, 2, 1> orthonormal_frame<2>(const Vec2& u) {
  Eigen::Matrix<double, 2, 1> F;
  F << -u.y(), u.x();
  return F;
}

template <> Eigen::Matrix<double, 3, 2> orthonormal_frame<3>(const Vec3& u) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(u[i]) < std::abs(u[k])) k = i;
  Vec3 a = Vec3::Zero();
  a[k] = 1.0;
  const Vec3 e1 = (a - a.dot(u) * u).normalized();
  const Vec3 e2 = u.cross(e1);
  Eigen::Matrix<double, 3, 2> F;
  F.col(0) = e1;
  F.col(1) = e2;
  return F;
}

// ---- dispatch over the three representations ----

template <int N> double support(const Body<N>& K, const Vec<N>& v) {
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, GraphBody<N>>)
          return graph_support<N>(b, v, nullptr);
        else
          return b.support(v);
      },
      K);
}

template <int N> Vec<N> support_point(const Body<N>& K, const Vec<N>& v) {
  return std::visit(
      [&](const auto& b) -> Vec<N> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, GraphBody<N>>) {
          Vec<N> pt;
          graph_support<N>(b, v, &pt);
          return pt;
        } else {
          return b.support_point(v);
        }
      },
      K);
}

template <int N> double radial(const Body<N>& K, const Vec<N>& v) {
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, GraphBody<N>>)
          return graph_radial(b, v);
        else
          return b.radial(v);
      },
      K);
}

template <int N> double polar_support(const Body<N>& K, const Vec<N>& v) {
  return 1.0 / radial(K, v);
}

template <int N> double volume(const Body<N>& K, const SphereGrid<N>& grid) {
  std::vector<double> r = map_nodes(grid, [&](const Vec<N>& v) {
    return std::pow(radial(K, v), double(N));
  });
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += grid.weights[i] * r[i];
  return s / N;
}

template <int N> double volume_exact(const Body<N>& K, const MeasureOptions& opt) {
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, GraphBody<N>>) {
          auto mesh = b.ensure_mesh(opt.base_level);
          double s = 0.0;
          for (const auto& c : mesh->cells) s += (b.f(c.centroid) - b.g(c.centroid)) * c.area;
          return s;
        } else {
          return b.volume();
        }
      },
      K);
}

template <int N>
SurfaceMeasure<N> surface_measure(const Body<N>& K, const MeasureOptions& opt) {
  SurfaceMeasure<N> out;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Polytope<N>>) {
          out.atomic = true;
          out.elems.reserve(b.facets().size());
          for (const auto& f : b.facets())
            out.elems.push_back({f.offset * f.normal, f.normal, f.area});
        } else if constexpr (std::is_same_v<T, Ellipsoid<N>>) {
          const SphereGrid<N> g = sphere_grid<N>(opt.sphere_level);
          out.elems.reserve(g.size());
          const double det = b.det();
          for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec<N>& w = g.nodes[i];
            const Vec<N> ainw = b.inverse() * w;
            const double nn = ainw.norm();
            out.elems.push_back({b.matrix() * w, ainw / nn, det * nn * g.weights[i]});
          }
        } else {
          graph_surface_measure(b, opt, out);
        }
      },
      K);
  return out;
}

template <int N>
double sp_integral(const SurfaceMeasure<N>& S,
                   const std::function<double(const Vec<N>&)>& phi, double p) {
  if (!(p > 1.0)) throw std::domain_error("sp_integral: requires p > 1");
  double s = 0.0;
  for (const auto& e : S.elems) {
    const double t = e.point.dot(e.normal);
    if (t <= 1e-14)
      throw std::domain_error("sp_integral: support offset vanished (origin not interior?)");
    s += phi(e.normal) * std::pow(t, 1.0 - p) * e.weight;
  }
  return s;
}

template <int N>
double sp_integral(const Body<N>& K, const std::function<double(const Vec<N>&)>& phi,
                   double p, const MeasureOptions& opt) {
  return sp_integral(surface_measure(K, opt), phi, p);
}

template <int N> Body<N> apply_linear(const Body<N>& K, const Mat<N>& A) {
  if (std::abs(A.determinant()) < 1e-14)
    throw std::invalid_argument("apply_linear: singular map");
  return std::visit(
      [&](const auto& b) -> Body<N> {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Polytope<N>>) {
          std::vector<Vec<N>> pts;
          pts.reserve(b.vertices().size());
          for (const auto& x : b.vertices()) pts.push_back(A * x);
          return hull<N>(pts);
        } else if constexpr (std::is_same_v<T, Ellipsoid<N>>) {
          // SPD factor of the composed map: M*Ball = sqrt(M M^T)*Ball
          const Mat<N> M = A * b.matrix();
          Eigen::SelfAdjointEigenSolver<Mat<N>> es(M * M.transpose());
          const Mat<N> S = es.eigenvectors() *
                           es.eigenvalues().cwiseSqrt().asDiagonal() *
                           es.eigenvectors().transpose();
          return Ellipsoid<N>(S);
        } else {
          if (!b.gauge)
            throw std::invalid_argument("apply_linear: graph body without gauge");
          const Mat<N> Ainv = A.inverse();
          auto g0 = *b.gauge;  // copy of closures
          auto gauge = std::make_shared<Gauge<N>>();
          gauge->value = [g0, Ainv](const Vec<N>& x) { return g0.value(Ainv * x); };
          gauge->grad = [g0, Ainv](const Vec<N>& x) {
            return Vec<N>(Ainv.transpose() * g0.grad(Ainv * x));
          };
          const Mat<N> Amap = A;
          gauge->support_point = [g0, Amap](const Vec<N>& d) {
            return Vec<N>(Amap * g0.support_point(Amap.transpose() * d));
          };
          return graph_body_from_gauge<N>(gauge, b.u, int(b.base.size()));
        }
      },
      K);
}

template <int N>
double sup_distance(const Body<N>& K, const Body<N>& L, const SphereGrid<N>& grid) {
  std::vector<double> d = map_nodes(grid, [&](const Vec<N>& v) {
    return std::abs(support(K, v) - support(L, v));
  });
  double best = 0.0;
  for (double x : d) best = std::max(best, x);
  return best;
}

template <int N> double base_area(const std::vector<Vec<N - 1>>& base) {
  if constexpr (N == 2) {
    double lo = base[0][0], hi = base[0][0];
    for (const auto& x : base) {
      lo = std::min(lo, x[0]);
      hi = std::max(hi, x[0]);
    }
    return hi - lo;
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const Vec2& a = base[i];
      const Vec2& b = base[(i + 1) % base.size()];
      s += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * s;
  }
}

bool point_in_convex_polygon(const std::vector<Vec2>& poly, const Vec2& x, double eps) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const double cr = (b.x() - a.x()) * (x.y() - a.y()) - (b.y() - a.y()) * (x.x() - a.x());
    if (cr < -eps) return false;
  }
  return true;
}

double convex_upper_root(const std::function<double(double)>& phi, double s_lo,
                         double s_hi, double tol) {
  double flo = phi(s_lo), fhi = phi(s_hi);
  if (flo > 1.0) return s_lo;  // empty chord beyond this point
  if (fhi <= 1.0) return s_hi;
  while (s_hi - s_lo > tol) {
    const double mid = 0.5 * (s_lo + s_hi);
    if (mid <= s_lo || mid >= s_hi) break;
    if (phi(mid) <= 1.0)
      s_lo = mid;
    else
      s_hi = mid;
  }
  return 0.5 * (s_lo + s_hi);
}

template <int N> Gauge<N> ellipsoid_gauge(const Ellipsoid<N>& E) {
  Gauge<N> g;
  const Mat<N> Ainv = E.inverse();
  const Mat<N> A = E.matrix();
  const Mat<N> Q = Ainv * Ainv;
  g.value = [Ainv](const Vec<N>& x) { return (Ainv * x).norm(); };
  g.grad = [Ainv, Q](const Vec<N>& x) {
    const double n = (Ainv * x).norm();
    return Vec<N>(Q * x / n);
  };
  g.support_point = [A](const Vec<N>& d) {
    const Vec<N> ad = A * d;
    return Vec<N>(A * ad / ad.norm());
  };
  return g;
}

template <int N> Gauge<N> lq_gauge(double q, double scale) {
  if (!(q > 1.0)) throw std::invalid_argument("lq_gauge: requires q > 1");
  if (!(scale > 0.0)) throw std::invalid_argument("lq_gauge: requires scale > 0");
  Gauge<N> g;
  g.value = [q, scale](const Vec<N>& x) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += std::pow(std::abs(x[i]) / scale, q);
    return std::pow(s, 1.0 / q);
  };
  g.grad = [q, scale](const Vec<N>& x) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += std::pow(std::abs(x[i]) / scale, q);
    const double c = std::pow(s, 1.0 / q - 1.0) / scale;
    Vec<N> out;
    for (int i = 0; i < N; ++i) {
      const double a = std::abs(x[i]) / scale;
      out[i] = c * (x[i] >= 0 ? 1.0 : -1.0) * std::pow(a, q - 1.0);
    }
    return out;
  };
  g.support_point = [q, scale, g](const Vec<N>& d) {
    // Hoelder equality case: y_i ~ sign(d_i)|d_i|^{1/(q-1)}, rescaled to the boundary
    Vec<N> y;
    for (int i = 0; i < N; ++i)
      y[i] = (d[i] >= 0 ? 1.0 : -1.0) * std::pow(std::abs(d[i]), 1.0 / (q - 1.0));
    const double v = g.value(y);
    return Vec<N>(y / v);
  };
  return g;
}

template Gauge<2> ellipsoid_gauge<2>(const Ellipsoid<2>&);
template Gauge<3> ellipsoid_gauge<3>(const Ellipsoid<3>&);
template Gauge<2> lq_gauge<2>(double, double);
template Gauge<3> lq_gauge<3>(double, double);

#define LPBMK_INSTANTIATE(N)                                                              \
  template double support<N>(const Body<N>&, const Vec<N>&);                             \
  template Vec<N> support_point<N>(const Body<N>&, const Vec<N>&);                       \
  template double radial<N>(const Body<N>&, const Vec<N>&);                              \
  template double polar_support<N>(const Body<N>&, const Vec<N>&);                       \
  template double volume<N>(const Body<N>&, const SphereGrid<N>&);                       \
  template double volume_exact<N>(const Body<N>&, const MeasureOptions&);                \
  template SurfaceMeasure<N> surface_measure<N>(const Body<N>&, const MeasureOptions&);  \
  template double sp_integral<N>(const SurfaceMeasure<N>&,                               \
                                 const std::function<double(const Vec<N>&)>&, double);   \
  template double sp_integral<N>(const Body<N>&,                                         \
                                 const std::function<double(const Vec<N>&)>&, double,    \
                                 const MeasureOptions&);                                  \
  template Body<N> apply_linear<N>(const Body<N>&, const Mat<N>&);                       \
  template double sup_distance<N>(const Body<N>&, const Body<N>&, const SphereGrid<N>&); \
  template double base_area<N>(const std::vector<Vec<N - 1>>&);

LPBMK_INSTANTIATE(2)
LPBMK_INSTANTIATE(3)
#undef LPBMK_INSTANTIATE

}  // namespace lpbmk
