#include "lpbmk/shadow.hpp"

#include "lpbmk/lp_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lpbmk {

namespace {

// the raw combination, never short-circuited; difference quotients need the
// t = 1 reference to go through this exact path
GraphBody<3> combine(const ShadowSystem& S, double t) {
  const GraphBody<3>& G = S.graph;
  GraphBody<3> out;
  out.u = G.u;
  out.frame = G.frame;
  out.base = G.base;
  out.mesh = G.mesh;
  auto f = G.f;
  auto g = G.g;
  out.f = [f, g, t](const Vec2& x) {
    const double a = f(x), b = g(x);
    return 0.5 * (t * (a + b) + (a - b));
  };
  out.g = [f, g, t](const Vec2& x) {
    const double a = f(x), b = g(x);
    return 0.5 * (t * (a + b) - (a - b));
  };
  auto fg = G.fgrad;
  auto gg = G.ggrad;
  out.fgrad = [fg, gg, t](const Vec2& x) {
    const Vec2 a = fg(x), b = gg(x);
    return Vec2(0.5 * (t * (a + b) + (a - b)));
  };
  out.ggrad = [fg, gg, t](const Vec2& x) {
    const Vec2 a = fg(x), b = gg(x);
    return Vec2(0.5 * (t * (a + b) - (a - b)));
  };
  return out;
}

void require_t(double t) {
  if (!(t >= -1.0 && t <= 1.0))
    throw std::invalid_argument("shadow parameter outside [-1, 1]");
}

bool unique_maximizer(const Body<3>& K, const Vec3& theta, const Vec3& x0) {
  if (const auto* P = std::get_if<Polytope<3>>(&K)) {
    const double h = support(K, theta);
    double scale = 1.0;
    for (const auto& v : P->vertices()) scale = std::max(scale, v.norm());
    int hits = 0;
    for (const auto& v : P->vertices())
      if (v.dot(theta) >= h - 1e-9 * scale) ++hits;
    return hits <= 1;
  }
  if (std::holds_alternative<Ellipsoid<3>>(K)) return true;
  // probe two tangential tilts; a flat spot makes the maximizer jump
  const Eigen::Matrix<double, 3, 2> F = orthonormal_frame<3>(theta);
  const double scale = x0.norm() + 1.0;
  for (int k = 0; k < 2; ++k) {
    const Vec3 tq = (theta + 1e-7 * F.col(k)).normalized();
    if ((support_point(K, tq) - x0).norm() > 1e-3 * scale) return false;
  }
  return true;
}

struct AdmissibleRef {
  std::vector<double> h1;   // raw-graph support of K
  std::vector<double> phi;  // perturbation values
};

AdmissibleRef admissible_ref(const ShadowSystem& S, const SphereGrid<3>& grid) {
  AdmissibleRef R;
  Body<3> ref = combine(S, 1.0);
  R.h1 = map_nodes(grid, [&](const Vec3& v) { return support(ref, v); });
  R.phi.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) R.phi[i] = perturbation_phi(S, grid.nodes[i]);
  return R;
}

std::pair<std::vector<double>, double> quotient_dev(const ShadowSystem& S,
                                                    const AdmissibleRef& R,
                                                    const SphereGrid<3>& grid, double t) {
  Body<3> Kt = combine(S, t);
  std::vector<double> ht = map_nodes(grid, [&](const Vec3& v) { return support(Kt, v); });
  std::vector<double> q(grid.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    q[i] = (ht[i] - R.h1[i]) / (t - 1.0);
    dev = std::max(dev, std::abs(q[i] - R.phi[i]));
  }
  return {std::move(q), dev};
}

}  // namespace

ShadowSystem make_shadow_system(const Body<3>& K, const Vec3& u, int base_samples) {
  ShadowSystem S;
  S.K = K;
  S.u = u.normalized();
  S.graph = graph_functions(K, S.u, base_samples);
  S.graph.ensure_mesh(MeasureOptions{}.base_level);
  Body<3> gb = S.graph;
  if (sup_distance(gb, K, sphere_grid_3(1)) > 1e-6)
    throw std::runtime_error("graph reconstruction deviates from the body");
  return S;
}

Body<3> shadow_body(const ShadowSystem& S, double t) {
  require_t(t);
  if (t == 1.0) return S.graph;
  return combine(S, t);
}

GraphBody<3> shadow_combination(const ShadowSystem& S, double t) {
  require_t(t);
  return combine(S, t);
}

GraphBody<3> reflect_graph(const GraphBody<3>& K) {
  GraphBody<3> out;
  out.u = K.u;
  out.frame = K.frame;
  out.base = K.base;
  out.mesh = K.mesh;
  auto f = K.f;
  auto g = K.g;
  out.f = [g](const Vec2& x) { return -g(x); };
  out.g = [f](const Vec2& x) { return -f(x); };
  auto fg = K.fgrad;
  auto gg = K.ggrad;
  out.fgrad = [gg](const Vec2& x) { return Vec2(-gg(x)); };
  out.ggrad = [fg](const Vec2& x) { return Vec2(-fg(x)); };
  return out;
}

double perturbation_phi(const ShadowSystem& S, const Vec3& theta, bool* ambiguous) {
  const Vec3 x = support_point(S.K, theta);
  if (ambiguous) *ambiguous = !unique_maximizer(S.K, theta, x);
  const Vec2 xp = clamp_to_base<3>(S.graph.base, S.graph.project(x));
  const double a = 0.5 * (S.graph.f(xp) + S.graph.g(xp));
  return a * S.u.dot(theta);
}

PerturbationTrace check_admissible(const ShadowSystem& S, const std::vector<double>& ts,
                                   const SphereGrid<3>& grid) {
  for (double t : ts)
    if (!(t >= 0.0 && t < 1.0))
      throw std::invalid_argument("difference quotients need t in [0, 1)");
  PerturbationTrace tr;
  tr.t = ts;
  AdmissibleRef R = admissible_ref(S, grid);
  tr.phi = R.phi;
  for (double t : ts) {
    auto [q, dev] = quotient_dev(S, R, grid, t);
    tr.quotients.push_back(std::move(q));
    tr.sup_dev.push_back(dev);
  }
  return tr;
}

double phi_surface_integral(const ShadowSystem& S, const MeasureOptions& opt) {
  SurfaceMeasure<3> M = surface_measure(S.K, opt);
  double s = 0.0;
  for (const auto& e : M.elems) s += e.weight * perturbation_phi(S, e.normal);
  return s;
}

double first_variation_polar_pi(const ShadowSystem& S, double p,
                                const std::vector<double>& steps, const SphereGrid<3>& grid,
                                const MeasureOptions& opt) {
  if (steps.empty()) throw std::invalid_argument("no difference steps given");
  Body<3> ref = combine(S, 1.0);
  const double F1 = polar_pi_volume(ref, p, grid, opt);
  std::vector<double> x = steps;
  std::vector<double> y(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i] > 0.0 && steps[i] <= 2.0))
      throw std::invalid_argument("difference steps must lie in (0, 2]");
    Body<3> Kt = combine(S, 1.0 - steps[i]);
    y[i] = (F1 - polar_pi_volume(Kt, p, grid, opt)) / steps[i];
  }
  // Neville at step 0
  const std::size_t n = y.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = n - 1; i >= m; --i)
      y[i] = (x[i] * y[i - 1] - x[i - m] * y[i]) / (x[i] - x[i - m]);
  return y[n - 1];
}

double volume_invariance_check(const ShadowSystem& S, const std::vector<double>& ts,
                               const MeasureOptions& opt) {
  Body<3> ref = combine(S, 1.0);
  const double v0 = volume_exact(ref, opt);
  double dev = 0.0;
  for (double t : ts) {
    require_t(t);
    Body<3> Kt = combine(S, t);
    dev = std::max(dev, std::abs(volume_exact(Kt, opt) - v0) / v0);
  }
  return dev;
}

std::vector<ShadowSweepRow> shadow_sweep(const ShadowSystem& S, double p,
                                         const std::vector<double>& ts,
                                         const SphereGrid<3>& grid,
                                         const MeasureOptions& opt) {
  AdmissibleRef R = admissible_ref(S, grid);
  std::vector<ShadowSweepRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) {
    require_t(t);
    ShadowSweepRow row;
    row.t = t;
    Body<3> Kt = combine(S, t);
    row.vol_kt = volume_exact(Kt, opt);
    row.vol_polar_pi = polar_pi_volume(Kt, p, grid, opt);
    row.phi_sup_dev = (t == 1.0) ? 0.0 : quotient_dev(S, R, grid, t).second;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lpbmk
