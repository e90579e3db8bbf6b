#pragma once

#include "bodies.hpp"

namespace lpbmk {

// Linear reflection shadow system along u, materialized as graph bodies:
//   f_t = (t/2)(f+g) + (1/2)(f-g),  g_t = (t/2)(f+g) - (1/2)(f-g)
// over the base of graph_functions(K, u), so K_1 = K, K_0 = S_u K and
// K_{-1} = R_u K.
struct ShadowSystem {
  Body<3> K;
  Vec3 u;
  GraphBody<3> graph;  // graph functions of K along u, mesh primed
};

// Builds the graph and verifies it reproduces support(K, .) within 1e-6.
ShadowSystem make_shadow_system(const Body<3>& K, const Vec3& u, int base_samples = 256);

// t = 1 hands back the stored graph unchanged (f_1 = f, g_1 = g identically);
// |t| > 1 would break concavity of f_t and is rejected.
Body<3> shadow_body(const ShadowSystem& S, double t);

// The combination as raw graph closures at every t, including t = 1.  A
// stored graph built from a gauge integrates with exact boundary normals
// while combinations use the radial map, and the two quadratures disagree
// at the 5e-4 level; comparisons across t must stay on one of them.
GraphBody<3> shadow_combination(const ShadowSystem& S, double t);

// Reflection about u^perp as a graph flip: upper <- -g, lower <- -f.
GraphBody<3> reflect_graph(const GraphBody<3>& K);

// phi(theta) = a(x_K(theta)) <u,theta> with a = (f+g)/2 at the projected
// support point.  `ambiguous` (optional) is set when the maximizer is not
// unique within tolerance; the first maximizer's value is returned anyway.
double perturbation_phi(const ShadowSystem& S, const Vec3& theta, bool* ambiguous = nullptr);

struct PerturbationTrace {
  std::vector<double> t;                       // values in [0, 1)
  std::vector<std::vector<double>> quotients;  // [k][i] = (h_{K_{t_k}} - h_K)(v_i)/(t_k - 1)
  std::vector<double> phi;                     // phi at the grid nodes
  std::vector<double> sup_dev;                 // per t: max_i |quotient - phi|
};

// Difference quotients toward t = 1^- against phi on the grid.  Every h runs
// through the raw graph pipeline, reference included, so the base
// discretization bias cancels in the quotient.
PerturbationTrace check_admissible(const ShadowSystem& S, const std::vector<double>& ts,
                                   const SphereGrid<3>& grid);

// int phi(nu) dS(K, nu); zero for every admissible support perturbation.
double phi_surface_integral(const ShadowSystem& S, const MeasureOptions& opt = {});

// One-sided d/dt of vol(Pi_p^* K_t) at t = 1^-, extrapolated to step 0 from
// the supplied difference quotients (Neville on the step polynomial).
double first_variation_polar_pi(const ShadowSystem& S, double p,
                                const std::vector<double>& steps, const SphereGrid<3>& grid,
                                const MeasureOptions& opt = {});

// max over the t grid of |vol(K_t) - vol(K_1)|/vol(K_1), Fubini volumes over
// the shared base mesh
double volume_invariance_check(const ShadowSystem& S, const std::vector<double>& ts,
                               const MeasureOptions& opt = {});

struct ShadowSweepRow {
  double t = 0.0;
  double vol_kt = 0.0;
  double vol_polar_pi = 0.0;
  double phi_sup_dev = 0.0;  // admissibility deviation; 0 at t = 1
};

// Per-t volumes and admissibility deviation, one row per t.
std::vector<ShadowSweepRow> shadow_sweep(const ShadowSystem& S, double p,
                                         const std::vector<double>& ts,
                                         const SphereGrid<3>& grid,
                                         const MeasureOptions& opt = {});

}  // namespace lpbmk
