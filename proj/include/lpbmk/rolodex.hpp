#pragma once

#include "lp_ops.hpp"
#include "shadow.hpp"

#include <vector>

namespace lpbmk {

// Fiber over u: the line E = span{e} in u^perp selected by the angle alpha,
// the unit vector w spanning E^perp ∩ u^perp, and the pi/2 rotation J of
// E^perp = span{w,u} fixed by J(w) = u, J(u) = -w.  The orientation of
// E^perp is a local choice; pe_wedge takes absolute values, so J and -J
// give identical results (negating w realizes -J).
struct Fiber {
  Vec3 u;
  double alpha = 0.0;
  Vec3 e;
  Vec3 w;

  // J applied to the E^perp-projection of x
  Vec3 J(const Vec3& x) const { return w.dot(x) * u - u.dot(x) * w; }
};

// alpha rotates within the orthonormal_frame basis of u^perp.
Fiber make_fiber(const Vec3& u, double alpha);

// |P_{E∧x,p} K| = ||P_{E^perp} x|| * sp_integral(K, |<J xhat, .>|^p, p)^{1/p};
// zero iff x projects to zero on E^perp.  Positively homogeneous in x by
// construction: the direction is normalized before the integral.
double pe_wedge(const Body<3>& K, const Fiber& F, const Vec3& x, double p,
                const MeasureOptions& opt = {});

// Length of {y : pe_wedge(K, F, y*w + s*u, p) <= 1}.  The constraint is
// convex in y, so the set is an interval; its endpoints are bisected to
// width tol on each side of the minimizer.  Empty set -> 0.
double section_length(const Body<3>& K, const Fiber& F, double s, double p,
                      double tol = 1e-10, const MeasureOptions& opt = {});

struct SectionProfile {
  Fiber fiber;
  std::vector<double> s;
  std::vector<double> lengths;
  double t = 1.0;  // shadow parameter of the body the profile was cut from
};

SectionProfile section_profile(const Body<3>& K, const Fiber& F,
                               std::vector<double> s, double p, double t = 1.0,
                               double tol = 1e-10, const MeasureOptions& opt = {});

// Boundary polygon of L_{E,p}(K) = {x in E^perp : pe_wedge(K,F,x,p) <= 1} in
// (w,u) coordinates: d_j / pe_wedge(K, F, d_j, p) for m equispaced d_j.
// For even m the second half is the exact negation of the first.
std::vector<Vec2> lep_boundary(const Body<3>& K, const Fiber& F, double p, int m,
                               const MeasureOptions& opt = {});

// ctilde_{3,p} * average over m_alpha fibers of int |s| * section_length ds,
// the Rolodex form of vol(Pi_p^* K).  Per fiber the s-support is bracketed
// by doubling until the length vanishes, the vanishing point is bisected,
// and the integral is a Gauss rule with m_s nodes on [0, s_max], doubled.
double rolodex_volume(const Body<3>& K, const Vec3& u, double p, int m_alpha,
                      int m_s, double tol = 1e-10, const MeasureOptions& opt = {});

// M_2 = (int |s| |L_{E,p,u,s}(K)| ds)^{-1/q} with q = 1 + 1/p.
// Throws domain_error when the section integral vanishes.
double m_functional(const Body<3>& K, const Fiber& F, double p, int m_s = 64,
                    double tol = 1e-10, const MeasureOptions& opt = {});

// M_2(t), evaluated on shadow_body(S, t).
double m_functional(const ShadowSystem& S, const Fiber& F, double t, double p,
                    int m_s = 64, double tol = 1e-10,
                    const MeasureOptions& opt = {});

// Max over consecutive triples (t0, tm, t1) of the grid of
//   M(tm) - [(1-a) M(t0) + a M(t1)],   a = (tm - t0)/(t1 - t0);
// positive values witness a convexity failure.  The grid must lie in [-1,1]
// and be symmetric about 0.  The family is evaluated through
// shadow_combination so all members share one quadrature.
double convexity_check(const ShadowSystem& S, const Fiber& F, double p,
                       const std::vector<double>& ts, int m_s = 64,
                       double tol = 1e-10, const MeasureOptions& opt = {});

struct HarmonicSample {
  double s0 = 1.0, s1 = 1.0;  // positive heights
  double alpha = 0.5;         // in (0,1)
  double t0 = 1.0, t1 = 1.0;  // shadow parameters in [-1,1]
};

// Per sample, with l = a*s0/(a*s0 + (1-a)*s1), s_a = (1-l)s0 + l*s1,
// t_a = (1-a)t0 + a*t1, checks the weighted section inequality
//   s_a^{(p-1)/p} |L_{s_a}(K_{t_a})|
//     >= (s0^{(p-1)/p}|L_{s0}(K_{t0})|)^{1-l} * (s1^{(p-1)/p}|L_{s1}(K_{t1})|)^l
// and the p-power inequality behind it,
//   pe(y_l w + s_a u; K_{t_a})^p
//     <= (1-l)(s0/s_a)^{1-p} pe(y0 w + s0 u; K_{t0})^p
//        + l(s1/s_a)^{1-p} pe(y1 w + s1 u; K_{t1})^p,  y_l = (1-l)y0 + l*y1,
// at y0 = y1 = 0 and two seeded random (y0, y1) pairs per sample.  Returns
// the max violation over samples and both forms (positive = failure).
double harmonic_inequality_check(const ShadowSystem& S, const Fiber& F, double p,
                                 const std::vector<HarmonicSample>& samples,
                                 double tol = 1e-10,
                                 const MeasureOptions& opt = {});

struct MonotonicityReport {
  std::vector<double> t;
  std::vector<double> vol;     // polar_pi_volume of K_t
  double max_increase = 0.0;   // max over consecutive pairs of vol[i+1]-vol[i]
};

// vol(Pi_p^* K_t) along an increasing t grid in [0,1]; non-positive
// max_increase means the sweep is monotone non-increasing.
MonotonicityReport monotonicity_sweep(const ShadowSystem& S, double p,
                                      const std::vector<double>& ts,
                                      const SphereGrid<3>& grid,
                                      const MeasureOptions& opt = {});

}  // namespace lpbmk
