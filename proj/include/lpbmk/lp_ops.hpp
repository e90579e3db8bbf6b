#pragma once

#include "bodies.hpp"

#include <cstdint>
#include <string>

namespace lpbmk {

// Support function sampled on a sphere grid, tagged by the operator that
// produced it.
template <int N> struct SampledSupport {
  SphereGrid<N> grid;
  std::vector<double> values;
  std::string source;
};

// Worst signed violation of h(v_i+v_j) <= h(v_i)+h(v_j) over random node
// pairs, with v_i+v_j snapped to the nearest grid node.  Stays below the
// grid's interpolation tolerance when h really is a support function.
template <int N>
double subadditivity_gap(const SampledSupport<N>& h, int samples, std::uint64_t seed);

// h_{Pi_p K}(v) = ( int |<v,nu>|^p h_K(nu)^{1-p} dS(K,nu) / (n w_n c_{n-2,p}) )^{1/p}
template <int N>
double pi_support(const Body<N>& K, double p, const Vec<N>& v,
                  const MeasureOptions& opt = {});
template <int N>
SampledSupport<N> pi_support_grid(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                  const MeasureOptions& opt = {});

// vol(Pi_p^* K) = (1/n) sum_i w_i pi_support(K,p,v_i)^{-n}
template <int N>
double polar_pi_volume(const Body<N>& K, double p, const SphereGrid<N>& grid,
                       const MeasureOptions& opt = {});

// h_{Gamma_p}(v)^p = int |<v,theta>|^p rho(theta)^{n+p} dtheta / ((n+p) c_{n,p} vol)
// with vol = (1/n) int rho^n dtheta on the same grid.
template <int N>
double gamma_support(const std::function<double(const Vec<N>&)>& rho, double p,
                     const Vec<N>& v, const SphereGrid<N>& grid);

// h_{Gamma_p Pi_p^* K} on the grid, via rho_{Pi_p^* K} = 1/h_{Pi_p K}
template <int N>
SampledSupport<N> gamma_polar_pi(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                 const MeasureOptions& opt = {});

// c_star is the midrange of the ratios h_{Gamma_p Pi_p^* K}(v_i)/h_K(v_i),
// the minimizer of max_i |ratio_i - c|; residual is the half-spread of the
// ratios relative to c_star, so residual = 0 iff Gamma_p Pi_p^* K = c K on
// the grid.
struct FixedPoint {
  double c_star = 0.0;
  double residual = 0.0;
};
template <int N>
FixedPoint fixed_point_residual(const Body<N>& K, double p, const SphereGrid<N>& grid,
                                const MeasureOptions& opt = {});

// Sup relative deviation over the grid of
//   h_{Pi_p(AK)}(v)    against h_{Pi_p K}(A^{-1}v)   (Pi_p(AK) = A^{-T} Pi_p K)
//   h_{Gamma_p(AK)}(v) against h_{Gamma_p K}(A^T v)  (Gamma_p(AK) = A Gamma_p K)
// Requires det A = 1.
struct CovarianceReport {
  double dev_pi = 0.0;
  double dev_gamma = 0.0;
};
template <int N>
CovarianceReport check_covariance(const Body<N>& K, const Mat<N>& A, double p,
                                  const SphereGrid<N>& grid, const MeasureOptions& opt = {});

}  // namespace lpbmk
