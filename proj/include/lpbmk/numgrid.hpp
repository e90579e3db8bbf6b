#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace lpbmk {

template <int N> using Vec = Eigen::Matrix<double, N, 1>;
template <int N> using Mat = Eigen::Matrix<double, N, N>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

inline constexpr double pi = 3.14159265358979323846;

// omega_r = pi^{r/2} / Gamma(1 + r/2), volume of the r-dimensional unit ball
// (real r >= 0 allowed).
double unit_ball_volume(double r);

// c_{n,p} = omega_{n+p} / (omega_2 * omega_n * omega_{p-1}); requires p > 1.
// Also invoked with first argument n-2, so n >= 0 is accepted.
double lyz_constant(int n, double p);

// cbar_{n,n-1} = integral of |cos phi|^{n-2} over S^1, in closed form
// 2*B((n-1)/2, 1/2).  Requires n >= 3.
double bp_constant(int n);

// ctilde_{n,p} = n*omega_n * (n*omega_n*c_{n-2,p})^{n/p} / cbar_{n,n-1}.
double rolodex_constant(int n, double p);

struct Quadrature1D {
  std::vector<double> x;
  std::vector<double> w;
  double lo = 0.0, hi = 0.0;
};

// Gauss-Legendre rule with m nodes on [lo, hi].
Quadrature1D gauss_legendre(int m, double lo, double hi);

template <class F> double integrate(const Quadrature1D& q, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * f(q.x[i]);
  return s;
}

template <int N> struct SphereGrid {
  std::vector<Vec<N>> nodes;
  std::vector<double> weights;
  int level = 0;
  double total() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  std::size_t size() const { return nodes.size(); }
};

// n=2: uniform angle grid, 16*2^level nodes, each weighted 2*pi/m.
// n=3: icosahedron subdivided `level` times; nodes are normalized triangle
// centroids, weights the spherical triangle areas (they tile S^2, so the
// weights sum to 4*pi up to rounding).
SphereGrid<2> sphere_grid_2(int level);
SphereGrid<3> sphere_grid_3(int level);

template <int N> SphereGrid<N> sphere_grid(int level);
template <> inline SphereGrid<2> sphere_grid<2>(int level) { return sphere_grid_2(level); }
template <> inline SphereGrid<3> sphere_grid<3>(int level) { return sphere_grid_3(level); }

template <int N, class F> double integrate(const SphereGrid<N>& g, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(g.nodes[i]);
  return s;
}

// Midpoint of the final bracket once its width is <= tol.  f(lo) and f(hi)
// must differ in sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

// Worker count shared by every parallel map; 0 restores the hardware default.
void set_jobs(int jobs);
int jobs();

// Static chunking, no work stealing: with results written into preallocated
// slots and reductions done serially afterwards, output is independent of the
// worker count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

// Evaluate f at every grid node in parallel; deterministic order.
template <int N, class F>
std::vector<double> map_nodes(const SphereGrid<N>& g, F&& f) {
  std::vector<double> out(g.nodes.size());
  parallel_for(g.nodes.size(), [&](std::size_t i) { out[i] = f(g.nodes[i]); });
  return out;
}

}  // namespace lpbmk
