#pragma once

#include "lpbmk/numgrid.hpp"

#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace lpbmk {

template <int N> struct Facet {
  Vec<N> normal;  // unit, outward
  double offset;  // h_K(normal)
  double area;    // (N-1)-measure
};

// V-representation plus derived facet data.  Build through hull().
template <int N> class Polytope {
 public:
  Polytope() = default;
  Polytope(std::vector<Vec<N>> vertices, std::vector<Facet<N>> facets)
      : verts_(std::move(vertices)), facets_(std::move(facets)) {}

  const std::vector<Vec<N>>& vertices() const { return verts_; }
  const std::vector<Facet<N>>& facets() const { return facets_; }

  double support(const Vec<N>& v) const;
  Vec<N> support_point(const Vec<N>& v) const;
  double radial(const Vec<N>& v) const;
  double volume() const;  // pyramid sum over facets, exact

 private:
  std::vector<Vec<N>> verts_;
  std::vector<Facet<N>> facets_;
};

// Convex hull with coplanar facets merged; throws std::invalid_argument when
// the points do not affinely span R^N.
template <int N> Polytope<N> hull(const std::vector<Vec<N>>& points);

// body = A * (unit ball) with A symmetric positive definite
template <int N> class Ellipsoid {
 public:
  explicit Ellipsoid(const Mat<N>& A);

  const Mat<N>& matrix() const { return A_; }
  const Mat<N>& inverse() const { return Ainv_; }
  double det() const { return det_; }

  double support(const Vec<N>& v) const { return (A_ * v).norm(); }
  double radial(const Vec<N>& v) const { return 1.0 / (Ainv_ * v).norm(); }
  double volume() const { return unit_ball_volume(N) * det_; }
  Vec<N> support_point(const Vec<N>& v) const {
    Vec<N> av = A_ * v;
    return A_ * av / av.norm();
  }

 private:
  Mat<N> A_, Ainv_;
  double det_ = 0.0;
};

// Smooth description of a convex body as {x : value(x) <= 1}; enables graph
// functions along arbitrary directions.
template <int N> struct Gauge {
  std::function<double(const Vec<N>&)> value;
  std::function<Vec<N>(const Vec<N>&)> grad;
  std::function<Vec<N>(const Vec<N>&)> support_point;  // argmax over the body of <x,d>
};

template <int N> struct BaseMesh {
  using BVec = Vec<N - 1>;
  struct Cell {
    BVec centroid;
    double area;
  };
  std::vector<Cell> cells;
  std::vector<BVec> points;  // candidate starts for support search / sampling
  int level = 0;
  double total_area() const {
    double s = 0;
    for (const auto& c : cells) s += c.area;
    return s;
  }
};

// Triangulated (n=3) or segmented (n=2) grid over the base's bounding box,
// cells clipped to the base.
template <int N>
BaseMesh<N> make_base_mesh(const std::vector<Vec<N - 1>>& base, int level);

// Body between two graphs over a convex base in u^perp:
//   K = { frame*x' + s*u : x' in base, g(x') <= s <= f(x') }.
template <int N> struct GraphBody {
  using BVec = Vec<N - 1>;

  Vec<N> u;                              // unit graph direction
  Eigen::Matrix<double, N, N - 1> frame; // orthonormal basis of u^perp
  std::vector<BVec> base;                // convex polygon (CCW) / interval endpoints
  std::function<double(const BVec&)> f, g;
  std::function<BVec(const BVec&)> fgrad, ggrad;
  std::shared_ptr<const Gauge<N>> gauge;                 // optional
  mutable std::shared_ptr<const BaseMesh<N>> mesh;       // cache, see ensure_mesh

  Vec<N> ambient(const BVec& x, double s) const { return frame * x + s * u; }
  BVec project(const Vec<N>& x) const { return frame.transpose() * x; }
  // builds (or rebuilds at a finer level) the cached base mesh
  std::shared_ptr<const BaseMesh<N>> ensure_mesh(int level) const;
};

// deterministic orthonormal basis of u^perp
template <int N> Eigen::Matrix<double, N, N - 1> orthonormal_frame(const Vec<N>& u);

template <int N> struct SurfaceMeasure {
  struct Elem {
    Vec<N> point;   // boundary point (atoms: offset*normal)
    Vec<N> normal;  // unit outer normal
    double weight;  // (N-1)-measure
  };
  std::vector<Elem> elems;
  bool atomic = false;
  double total() const {
    double s = 0;
    for (const auto& e : elems) s += e.weight;
    return s;
  }
  Vec<N> first_moment() const {
    Vec<N> m = Vec<N>::Zero();
    for (const auto& e : elems) m += e.weight * e.normal;
    return m;
  }
};

template <int N> using Body = std::variant<Polytope<N>, Ellipsoid<N>, GraphBody<N>>;

struct MeasureOptions {
  int sphere_level = 3;  // ellipsoid boundary parameterization
  int base_level = 5;    // graph-body base mesh refinement
};

template <int N> double support(const Body<N>& K, const Vec<N>& v);
template <int N> Vec<N> support_point(const Body<N>& K, const Vec<N>& v);
template <int N> double radial(const Body<N>& K, const Vec<N>& v);
template <int N> double polar_support(const Body<N>& K, const Vec<N>& v);

// (1/n) * int rho^n over the grid
template <int N> double volume(const Body<N>& K, const SphereGrid<N>& grid);
// representation-native value: pyramid sum / omega_n*det / base-mesh Fubini
template <int N> double volume_exact(const Body<N>& K, const MeasureOptions& opt = {});

template <int N>
SurfaceMeasure<N> surface_measure(const Body<N>& K, const MeasureOptions& opt = {});

// int phi(nu) h_K(nu)^{1-p} dS(K, nu)
template <int N>
double sp_integral(const SurfaceMeasure<N>& S,
                   const std::function<double(const Vec<N>&)>& phi, double p);
template <int N>
double sp_integral(const Body<N>& K, const std::function<double(const Vec<N>&)>& phi,
                   double p, const MeasureOptions& opt = {});

// Graph functions of K along u, returned as a GraphBody (no mesh attached).
// base_samples bounds the polygon size used for curved bases.
template <int N>
GraphBody<N> graph_functions(const Body<N>& K, const Vec<N>& u, int base_samples = 256);

// Steiner symmetral as a GraphBody over the same base
template <int N>
Body<N> steiner(const Body<N>& K, const Vec<N>& u, int base_samples = 256);

template <int N> Body<N> apply_linear(const Body<N>& K, const Mat<N>& A);

template <int N>
double sup_distance(const Body<N>& K, const Body<N>& L, const SphereGrid<N>& grid);

// ---- helpers shared across modules ----

// area of a convex CCW polygon / length of an interval
template <int N> double base_area(const std::vector<Vec<N - 1>>& base);
// strict-interior test with tolerance eps >= 0
bool point_in_convex_polygon(const std::vector<Vec2>& poly, const Vec2& x, double eps);

// nearest feasible point of the base (interval clamp / cyclic edge projection)
template <int N>
Vec<N - 1> clamp_to_base(const std::vector<Vec<N - 1>>& base, Vec<N - 1> x);

// largest s <= s_hi with phi(s) <= 1 for phi convex increasing at the root;
// phi must exceed 1 at s_hi
double convex_upper_root(const std::function<double(double)>& phi, double s_lo,
                         double s_hi, double tol);

// graph body made from a smooth gauge: base polygon from projected support
// points, f/g by root finding, gradients by implicit differentiation
template <int N>
GraphBody<N> graph_body_from_gauge(std::shared_ptr<const Gauge<N>> gauge,
                                   const Vec<N>& u, int base_samples = 256);

template <int N> Gauge<N> ellipsoid_gauge(const Ellipsoid<N>& E);
// lq ball {sum |x_i/scale|^q <= 1}; q > 1
template <int N> Gauge<N> lq_gauge(double q, double scale);

// graph-body primitives (pattern search over the base / chord bisection)
template <int N>
double graph_support(const GraphBody<N>& K, const Vec<N>& v, Vec<N>* point,
                     int level = 5);
template <int N> double graph_radial(const GraphBody<N>& K, const Vec<N>& v);
// radial-map sphere quadrature, dS = rho^{n-1}/<w,nu> dw; with a gauge the
// normal comes from grad, without one from the graph side the ray exits
// through (walls included)
template <int N>
void graph_surface_measure(const GraphBody<N>& K, const MeasureOptions& opt,
                           SurfaceMeasure<N>& out);

}  // namespace lpbmk
