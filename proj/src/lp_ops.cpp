#include "lpbmk/lp_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace lpbmk {

namespace {

// h^{1-p} underflows on desk-scale bodies beyond 10
void require_p(double p) {
  if (!(p > 1.0 && p <= 10.0)) throw std::invalid_argument("p must lie in (1, 10]");
}

// h(v) = ( sum_j coeff_j |<v, axes_j>|^p / norm )^{1/p} for every requested
// direction.  p = 2 collapses to a quadratic form, evaluated in O(1) per
// direction after one pass over the axes.
template <int N>
std::vector<double> moment_support(const std::vector<Vec<N>>& axes,
                                   const std::vector<double>& coeff, double norm, double p,
                                   const std::vector<Vec<N>>& dirs) {
  std::vector<double> out(dirs.size());
  if (p == 2.0) {
    Mat<N> M = Mat<N>::Zero();
    for (std::size_t j = 0; j < axes.size(); ++j)
      M += coeff[j] * (axes[j] * axes[j].transpose());
    M /= norm;
    parallel_for(dirs.size(), [&](std::size_t i) {
      out[i] = std::sqrt(dirs[i].dot(M * dirs[i]));
    });
    return out;
  }
  parallel_for(dirs.size(), [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < axes.size(); ++j)
      s += coeff[j] * std::pow(std::abs(dirs[i].dot(axes[j])), p);
    out[i] = std::pow(s / norm, 1.0 / p);
  });
  return out;
}

// surface measure with the h^{1-p} weight folded in, validated once
template <int N> struct PiKernel {
  std::vector<Vec<N>> normals;
  std::vector<double> coeff;
  double norm = 0.0;  // n w_n c_{n-2,p}
};

template <int N> PiKernel<N> pi_kernel(const SurfaceMeasure<N>& S, double p) {
  PiKernel<N> k;
  k.norm = N * unit_ball_volume(N) * lyz_constant(N - 2, p);
  k.normals.reserve(S.elems.size());
  k.coeff.reserve(S.elems.size());
  for (const auto& e : S.elems) {
    double h = e.point.dot(e.normal);
    if (h <= 1e-14) throw std::domain_error("support offset vanished");
    k.normals.push_back(e.normal);
    k.coeff.push_back(e.weight * std::pow(h, 1.0 - p));
  }
  return k;
}

// radial samples raised to n+p, with the grid weights folded in
template <int N> struct GammaKernel {
  std::vector<double> coeff;
  double norm = 0.0;  // (n+p) c_{n,p} vol
};

template <int N>
GammaKernel<N> gamma_kernel(const std::vector<double>& rho, double p, const SphereGrid<N>& g) {
  if (rho.size() != g.size()) throw std::invalid_argument("radial samples do not match the grid");
  GammaKernel<N> k;
  k.coeff.resize(rho.size());
  double vol = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] > 0.0)) throw std::domain_error("radial function not positive on the grid");
    vol += g.weights[i] * std::pow(rho[i], double(N));
    k.coeff[i] = g.weights[i] * std::pow(rho[i], double(N) + p);
  }
  vol /= N;
  k.norm = (N + p) * lyz_constant(N, p) * vol;
  return k;
}

}  // namespace

template <int N>
double subadditivity_gap(const SampledSupport<N>& h, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = h.grid.size();
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    std::size_t i = rng() % n;
    std::size_t j = rng() % n;
    Vec<N> m = h.grid.nodes[i] + h.grid.nodes[j];
    double len = m.norm();
    if (len < 1e-9) continue;  // antipodal pair, nothing to test
    Vec<N> dir = m / len;
    std::size_t best = 0;
    double bd = -2.0;
    for (std::size_t t = 0; t < n; ++t) {
      double d = dir.dot(h.grid.nodes[t]);
      if (d > bd) {
        bd = d;
        best = t;
      }
    }
    worst = std::max(worst, len * h.values[best] - h.values[i] - h.values[j]);
  }
  return worst;
}

template <int N>
double pi_support(const Body<N>& K, double p, const Vec<N>& v, const MeasureOptions& opt) {
  require_p(p);
  PiKernel<N> k = pi_kernel(surface_measure(K, opt), p);
  return moment_support<N>(k.normals, k.coeff, k.norm, p, std::vector<Vec<N>>{v})[0];
}

template <int N>
SampledSupport<N> pi_support_grid(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                  const MeasureOptions& opt) {
  require_p(p);
  PiKernel<N> k = pi_kernel(surface_measure(K, opt), p);
  return {grid, moment_support<N>(k.normals, k.coeff, k.norm, p, grid.nodes), "pi"};
}

template <int N>
double polar_pi_volume(const Body<N>& K, double p, const SphereGrid<N>& grid,
                       const MeasureOptions& opt) {
  SampledSupport<N> h = pi_support_grid(K, p, grid, opt);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += grid.weights[i] * std::pow(h.values[i], -double(N));
  return s / N;
}

template <int N>
double gamma_support(const std::function<double(const Vec<N>&)>& rho, double p,
                     const Vec<N>& v, const SphereGrid<N>& grid) {
  require_p(p);
  GammaKernel<N> k = gamma_kernel<N>(map_nodes(grid, rho), p, grid);
  return moment_support<N>(grid.nodes, k.coeff, k.norm, p, std::vector<Vec<N>>{v})[0];
}

template <int N>
SampledSupport<N> gamma_polar_pi(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                 const MeasureOptions& opt) {
  SampledSupport<N> hpi = pi_support_grid(K, p, grid, opt);
  std::vector<double> rho(hpi.values.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = 1.0 / hpi.values[i];
  GammaKernel<N> k = gamma_kernel<N>(rho, p, grid);
  return {grid, moment_support<N>(grid.nodes, k.coeff, k.norm, p, grid.nodes),
          "gamma_polar_pi"};
}

template <int N>
FixedPoint fixed_point_residual(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                const MeasureOptions& opt) {
  SampledSupport<N> g = gamma_polar_pi(K, p, grid, opt);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double r = g.values[i] / support(K, grid.nodes[i]);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  FixedPoint fp;
  fp.c_star = 0.5 * (hi + lo);
  fp.residual = (hi - lo) / (2.0 * fp.c_star);
  return fp;
}

template <int N>
CovarianceReport check_covariance(const Body<N>& K, const Mat<N>& A, double p,
                                  const SphereGrid<N>& grid, const MeasureOptions& opt) {
  require_p(p);
  if (std::abs(A.determinant() - 1.0) > 1e-10)
    throw std::invalid_argument("A must have determinant 1");
  Body<N> AK = apply_linear(K, A);
  CovarianceReport rep;

  auto sup_dev = [&](const std::vector<double>& left, const std::vector<double>& right,
                     const std::vector<double>& scale) {
    double d = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) {
      double r = scale[i] * right[i];
      d = std::max(d, std::abs(left[i] - r) / r);
    }
    return d;
  };
  auto pulled_dirs = [&](const Mat<N>& M, std::vector<double>& scale) {
    std::vector<Vec<N>> dirs(grid.size());
    scale.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      Vec<N> w = M * grid.nodes[i];
      scale[i] = w.norm();
      dirs[i] = w / scale[i];
    }
    return dirs;
  };

  {
    SampledSupport<N> left = pi_support_grid(AK, p, grid, opt);
    PiKernel<N> k = pi_kernel(surface_measure(K, opt), p);
    std::vector<double> scale;
    std::vector<Vec<N>> dirs = pulled_dirs(Mat<N>(A.inverse()), scale);
    std::vector<double> right = moment_support<N>(k.normals, k.coeff, k.norm, p, dirs);
    rep.dev_pi = sup_dev(left.values, right, scale);
  }
  {
    GammaKernel<N> kl =
        gamma_kernel<N>(map_nodes(grid, [&](const Vec<N>& t) { return radial(AK, t); }), p, grid);
    std::vector<double> left = moment_support<N>(grid.nodes, kl.coeff, kl.norm, p, grid.nodes);
    GammaKernel<N> kr =
        gamma_kernel<N>(map_nodes(grid, [&](const Vec<N>& t) { return radial(K, t); }), p, grid);
    std::vector<double> scale;
    std::vector<Vec<N>> dirs = pulled_dirs(Mat<N>(A.transpose()), scale);
    std::vector<double> right = moment_support<N>(grid.nodes, kr.coeff, kr.norm, p, dirs);
    rep.dev_gamma = sup_dev(left, right, scale);
  }
  return rep;
}

#define LPBMK_INSTANTIATE(N)                                                                  \
  template double subadditivity_gap<N>(const SampledSupport<N>&, int, std::uint64_t);        \
  template double pi_support<N>(const Body<N>&, double, const Vec<N>&,                       \
                                const MeasureOptions&);                                       \
  template SampledSupport<N> pi_support_grid<N>(const Body<N>&, double, const SphereGrid<N>&, \
                                                const MeasureOptions&);                       \
  template double polar_pi_volume<N>(const Body<N>&, double, const SphereGrid<N>&,           \
                                     const MeasureOptions&);                                  \
  template double gamma_support<N>(const std::function<double(const Vec<N>&)>&, double,      \
                                   const Vec<N>&, const SphereGrid<N>&);                      \
  template SampledSupport<N> gamma_polar_pi<N>(const Body<N>&, double, const SphereGrid<N>&, \
                                               const MeasureOptions&);                        \
  template FixedPoint fixed_point_residual<N>(const Body<N>&, double, const SphereGrid<N>&,  \
                                              const MeasureOptions&);                         \
  template CovarianceReport check_covariance<N>(const Body<N>&, const Mat<N>&, double,       \
                                                const SphereGrid<N>&, const MeasureOptions&);

LPBMK_INSTANTIATE(2)
LPBMK_INSTANTIATE(3)
#undef LPBMK_INSTANTIATE

}  // namespace lpbmk
