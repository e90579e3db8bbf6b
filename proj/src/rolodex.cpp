#include "lpbmk/rolodex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace lpbmk {

namespace {

void require_p(double p) {
  if (!(p > 1.0 && p <= 10.0)) throw std::invalid_argument("p must lie in (1, 10]");
}

// Surface measure condensed to what pe evaluations need.  For p = 2 the
// integral is a quadratic form and the second-moment matrix replaces the
// element list.
struct PeKernel {
  double p = 2.0;
  bool quad = false;
  Mat3 Q = Mat3::Zero();  // sum w h^{-1} nu nu^T
  std::vector<Vec3> nu;
  std::vector<double> c;  // w h^{1-p}
};

PeKernel make_pe_kernel(const Body<3>& K, double p, const MeasureOptions& opt) {
  require_p(p);
  SurfaceMeasure<3> S = surface_measure(K, opt);
  PeKernel k;
  k.p = p;
  k.quad = (p == 2.0);
  if (!k.quad) {
    k.nu.reserve(S.elems.size());
    k.c.reserve(S.elems.size());
  }
  for (const auto& el : S.elems) {
    double h = el.point.dot(el.normal);
    if (h <= 1e-14) throw std::domain_error("support offset vanished");
    double coeff = el.weight * std::pow(h, 1.0 - p);
    if (k.quad) {
      k.Q += coeff * (el.normal * el.normal.transpose());
    } else {
      k.nu.push_back(el.normal);
      k.c.push_back(coeff);
    }
  }
  return k;
}

// The section constraint lives in the (w,u) plane: at x = y*w + s*u the J
// image is y*u - s*w, so only the normal components along u and w enter.
struct FiberKernel {
  double p = 2.0;
  bool quad = false;
  double quu = 0.0, quw = 0.0, qww = 0.0;
  std::vector<double> a;  // <u, nu>
  std::vector<double> b;  // <w, nu>
  std::vector<double> c;

  // pe_wedge(y*w + s*u)^p; for quad this is the quadratic form directly
  double power(double y, double s) const {
    if (quad) return y * y * quu - 2.0 * y * s * quw + s * s * qww;
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      acc += c[i] * std::pow(std::abs(y * a[i] - s * b[i]), p);
    return acc;
  }
};

FiberKernel make_fiber_kernel(const PeKernel& k, const Fiber& F) {
  FiberKernel fk;
  fk.p = k.p;
  fk.quad = k.quad;
  if (k.quad) {
    fk.quu = F.u.dot(k.Q * F.u);
    fk.quw = F.u.dot(k.Q * F.w);
    fk.qww = F.w.dot(k.Q * F.w);
    return fk;
  }
  fk.a.resize(k.nu.size());
  fk.b.resize(k.nu.size());
  fk.c = k.c;
  for (std::size_t i = 0; i < k.nu.size(); ++i) {
    fk.a[i] = F.u.dot(k.nu[i]);
    fk.b[i] = F.w.dot(k.nu[i]);
  }
  return fk;
}

// Interval length of {y : power(y, s) <= 1}.
double section_length_fk(const FiberKernel& fk, double s, double tol) {
  if (fk.quad) {
    // quu y^2 - 2 quw s y + qww s^2 = 1, length from the root gap
    double disc = fk.quw * s * fk.quw * s - fk.quu * (fk.qww * s * s - 1.0);
    if (!(disc > 0.0)) return 0.0;
    return 2.0 * std::sqrt(disc) / fk.quu;
  }
  auto g = [&](double y) { return fk.power(y, s); };
  // bracket the minimizer of the convex constraint
  double span = std::max(1.0, 2.0 * std::abs(s));
  double g0 = g(0.0);
  for (int i = 0; i < 80 && (g(-span) <= g0 || g(span) <= g0); ++i) span *= 2.0;
  double lo = -span, hi = span;
  while (hi - lo > std::max(tol, 1e-13) * std::max(1.0, std::abs(s))) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (g(m1) < g(m2)) hi = m2;
    else lo = m1;
  }
  double ymin = 0.5 * (lo + hi);
  if (g(ymin) > 1.0) return 0.0;
  auto root_above = [&](double inside, double sign) {
    double step = std::max(1.0, std::abs(s) + std::abs(inside));
    double out = inside + sign * step;
    for (int i = 0; i < 80 && g(out) <= 1.0; ++i) {
      inside = out;
      step *= 2.0;
      out = inside + sign * step;
    }
    for (int i = 0; i < 200 && std::abs(out - inside) > tol; ++i) {
      double mid = 0.5 * (inside + out);
      (g(mid) <= 1.0 ? inside : out) = mid;
    }
    return 0.5 * (inside + out);
  };
  return root_above(ymin, +1.0) - root_above(ymin, -1.0);
}

// 2 * int_0^{smax} s * length ds; the vanishing point of the length is
// bracketed by doubling, bisected, and the integral is a Gauss rule.
double section_integral_fk(const FiberKernel& fk, int m_s, double tol) {
  if (m_s < 2) throw std::invalid_argument("s grid needs at least 2 nodes");
  if (section_length_fk(fk, 0.0, tol) <= 0.0)
    throw std::domain_error("section integral vanished");
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (section_length_fk(fk, hi, tol) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw std::domain_error("section support unbounded");
  }
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    (section_length_fk(fk, mid, tol) > 0.0 ? lo : hi) = mid;
  }
  double smax = 0.5 * (lo + hi);
  Quadrature1D q = gauss_legendre(m_s, 0.0, smax);
  double acc = 0.0;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    acc += q.w[i] * q.x[i] * section_length_fk(fk, q.x[i], tol);
  return 2.0 * acc;
}

}  // namespace

Fiber make_fiber(const Vec3& u, double alpha) {
  double n = u.norm();
  if (!(n > 0.0) || !std::isfinite(n))
    throw std::invalid_argument("make_fiber: u must be a nonzero vector");
  Fiber F;
  F.u = u / n;
  F.alpha = alpha;
  Eigen::Matrix<double, 3, 2> B = orthonormal_frame<3>(F.u);
  double ca = std::cos(alpha), sa = std::sin(alpha);
  F.e = Vec3(ca * B.col(0) + sa * B.col(1));
  F.w = Vec3(-sa * B.col(0) + ca * B.col(1));
  return F;
}

double pe_wedge(const Body<3>& K, const Fiber& F, const Vec3& x, double p,
                const MeasureOptions& opt) {
  require_p(p);
  double y = F.w.dot(x), s = F.u.dot(x);
  double norm = std::sqrt(y * y + s * s);
  if (norm == 0.0) return 0.0;
  // normalize first so the result is exactly homogeneous in x
  Vec3 dir = (y / norm) * F.u - (s / norm) * F.w;
  double integral = sp_integral<3>(
      K, [&](const Vec3& v) { return std::pow(std::abs(dir.dot(v)), p); }, p, opt);
  return norm * std::pow(integral, 1.0 / p);
}

double section_length(const Body<3>& K, const Fiber& F, double s, double p,
                      double tol, const MeasureOptions& opt) {
  FiberKernel fk = make_fiber_kernel(make_pe_kernel(K, p, opt), F);
  return section_length_fk(fk, s, tol);
}

SectionProfile section_profile(const Body<3>& K, const Fiber& F,
                               std::vector<double> s, double p, double t,
                               double tol, const MeasureOptions& opt) {
  FiberKernel fk = make_fiber_kernel(make_pe_kernel(K, p, opt), F);
  SectionProfile out;
  out.fiber = F;
  out.t = t;
  out.lengths.reserve(s.size());
  for (double si : s) out.lengths.push_back(section_length_fk(fk, si, tol));
  out.s = std::move(s);
  return out;
}

std::vector<Vec2> lep_boundary(const Body<3>& K, const Fiber& F, double p, int m,
                               const MeasureOptions& opt) {
  if (m < 3) throw std::invalid_argument("lep_boundary: need at least 3 directions");
  FiberKernel fk = make_fiber_kernel(make_pe_kernel(K, p, opt), F);
  std::vector<Vec2> pts(m);
  int half = (m % 2 == 0) ? m / 2 : m;
  for (int j = 0; j < half; ++j) {
    double psi = 2.0 * pi * j / m;
    double y = std::cos(psi), s = std::sin(psi);
    double pe = std::pow(fk.power(y, s), 1.0 / fk.p);
    if (!(pe > 0.0)) throw std::domain_error("pe_wedge vanished on a unit direction");
    pts[j] = Vec2(y / pe, s / pe);
  }
  for (int j = half; j < m; ++j) pts[j] = -pts[j - half];
  return pts;
}

double rolodex_volume(const Body<3>& K, const Vec3& u, double p, int m_alpha,
                      int m_s, double tol, const MeasureOptions& opt) {
  if (m_alpha < 1) throw std::invalid_argument("rolodex_volume: need at least one angle");
  PeKernel k = make_pe_kernel(K, p, opt);
  double acc = 0.0;
  for (int j = 0; j < m_alpha; ++j) {
    Fiber F = make_fiber(u, pi * j / m_alpha);
    acc += section_integral_fk(make_fiber_kernel(k, F), m_s, tol);
  }
  return rolodex_constant(3, p) * acc / m_alpha;
}

double m_functional(const Body<3>& K, const Fiber& F, double p, int m_s,
                    double tol, const MeasureOptions& opt) {
  FiberKernel fk = make_fiber_kernel(make_pe_kernel(K, p, opt), F);
  double integral = section_integral_fk(fk, m_s, tol);
  if (!(integral > 0.0)) throw std::domain_error("section integral vanished");
  return std::pow(integral, -p / (p + 1.0));  // -1/q, q = 1 + 1/p
}

double m_functional(const ShadowSystem& S, const Fiber& F, double t, double p,
                    int m_s, double tol, const MeasureOptions& opt) {
  return m_functional(shadow_body(S, t), F, p, m_s, tol, opt);
}

double convexity_check(const ShadowSystem& S, const Fiber& F, double p,
                       const std::vector<double>& ts, int m_s, double tol,
                       const MeasureOptions& opt) {
  std::vector<double> grid = ts;
  std::sort(grid.begin(), grid.end());
  for (double t : grid) {
    if (std::abs(t) > 1.0 + 1e-12)
      throw std::invalid_argument("convexity_check: t grid must lie in [-1,1]");
    bool mirrored = std::any_of(grid.begin(), grid.end(),
                                [t](double v) { return std::abs(v + t) <= 1e-12; });
    if (!mirrored)
      throw std::invalid_argument("convexity_check: t grid must be symmetric about 0");
  }
  std::vector<double> M(grid.size());
  // one pipeline for the whole family; shadow_body's t = 1 shortcut would
  // compare the stored graph's quadrature against the combinations'
  for (std::size_t i = 0; i < grid.size(); ++i)
    M[i] = m_functional(shadow_combination(S, grid[i]), F, p, m_s, tol, opt);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    double span = grid[i + 1] - grid[i - 1];
    if (span <= 0.0) continue;
    double a = (grid[i] - grid[i - 1]) / span;
    worst = std::max(worst, M[i] - ((1.0 - a) * M[i - 1] + a * M[i + 1]));
  }
  return std::isfinite(worst) ? worst : 0.0;
}

double harmonic_inequality_check(const ShadowSystem& S, const Fiber& F, double p,
                                 const std::vector<HarmonicSample>& samples,
                                 double tol, const MeasureOptions& opt) {
  require_p(p);
  std::mt19937_64 rng(160802);  // fixed stream for the sampled (y0, y1) pairs
  std::uniform_real_distribution<double> U(-0.4, 0.4);
  double worst = -std::numeric_limits<double>::infinity();
  for (const HarmonicSample& smp : samples) {
    if (!(smp.s0 > 0.0 && smp.s1 > 0.0))
      throw std::invalid_argument("harmonic sample: heights must be positive");
    if (!(smp.alpha > 0.0 && smp.alpha < 1.0))
      throw std::invalid_argument("harmonic sample: alpha must lie in (0,1)");
    if (std::abs(smp.t0) > 1.0 || std::abs(smp.t1) > 1.0)
      throw std::invalid_argument("harmonic sample: t must lie in [-1,1]");
    double l = smp.alpha * smp.s0 / (smp.alpha * smp.s0 + (1.0 - smp.alpha) * smp.s1);
    double sa = (1.0 - l) * smp.s0 + l * smp.s1;
    double ta = (1.0 - smp.alpha) * smp.t0 + smp.alpha * smp.t1;
    FiberKernel f0 = make_fiber_kernel(make_pe_kernel(shadow_body(S, smp.t0), p, opt), F);
    FiberKernel f1 = make_fiber_kernel(make_pe_kernel(shadow_body(S, smp.t1), p, opt), F);
    FiberKernel fa = make_fiber_kernel(make_pe_kernel(shadow_body(S, ta), p, opt), F);
    double e = (p - 1.0) / p;
    double lhs = std::pow(sa, e) * section_length_fk(fa, sa, tol);
    double rhs = std::pow(std::pow(smp.s0, e) * section_length_fk(f0, smp.s0, tol), 1.0 - l) *
                 std::pow(std::pow(smp.s1, e) * section_length_fk(f1, smp.s1, tol), l);
    worst = std::max(worst, rhs - lhs);
    double w0 = std::pow(smp.s0 / sa, 1.0 - p);
    double w1 = std::pow(smp.s1 / sa, 1.0 - p);
    const double pairs[3][2] = {{0.0, 0.0}, {U(rng), U(rng)}, {U(rng), U(rng)}};
    for (const auto& pr : pairs) {
      double yl = (1.0 - l) * pr[0] + l * pr[1];
      double lhs_p = fa.power(yl, sa);
      double rhs_p = (1.0 - l) * w0 * f0.power(pr[0], smp.s0) +
                     l * w1 * f1.power(pr[1], smp.s1);
      worst = std::max(worst, lhs_p - rhs_p);
    }
  }
  return std::isfinite(worst) ? worst : 0.0;
}

MonotonicityReport monotonicity_sweep(const ShadowSystem& S, double p,
                                      const std::vector<double>& ts,
                                      const SphereGrid<3>& grid,
                                      const MeasureOptions& opt) {
  if (ts.empty()) throw std::invalid_argument("monotonicity_sweep: empty t grid");
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 0.0 || ts[i] > 1.0)
      throw std::invalid_argument("monotonicity_sweep: t grid must lie in [0,1]");
    if (i > 0 && ts[i] <= ts[i - 1])
      throw std::invalid_argument("monotonicity_sweep: t grid must increase");
  }
  MonotonicityReport rep;
  rep.t = ts;
  rep.vol.reserve(ts.size());
  // volumes compared along the sweep, so the t = 1 endpoint goes through
  // the same raw combination as the rest of the family
  for (double t : ts)
    rep.vol.push_back(polar_pi_volume<3>(shadow_combination(S, t), p, grid, opt));
  rep.max_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rep.vol.size(); ++i)
    rep.max_increase = std::max(rep.max_increase, rep.vol[i] - rep.vol[i - 1]);
  if (!std::isfinite(rep.max_increase)) rep.max_increase = 0.0;
  return rep;
}

}  // namespace lpbmk
