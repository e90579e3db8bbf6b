#include "doctest.h"

#include "lpbmk/body_io.hpp"
#include "lpbmk/lp_ops.hpp"
#include "lpbmk/shadow.hpp"

#include <cmath>
#include <random>

using namespace lpbmk;

namespace {

std::vector<Vec3> cube_corners(double r = 1.0) {
  std::vector<Vec3> pts;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) pts.push_back(Vec3(sx * r, sy * r, sz * r));
  return pts;
}

Body<3> unit_ball() { return Ellipsoid<3>(Mat3::Identity()); }

Body<3> diag_ellipsoid() {
  return Ellipsoid<3>(Mat3(Vec3(1.0, 1.5, 2.0).asDiagonal()));
}

Mat3 shear_matrix() {
  Mat3 A = Mat3::Identity();
  A(2, 0) = 0.3;  // z += 0.3 x, det 1
  return A;
}

// sheared ball: an ellipsoid whose graphs along e3 have a(x) = 0.3 x1
Body<3> sheared_ball() { return apply_linear(unit_ball(), shear_matrix()); }

// sheared l4 ball: smooth, centrally symmetric, not a body of revolution
Body<3> sheared_l4() {
  return apply_linear(Body<3>(lq_ball_body(4.0, 1.0)), shear_matrix());
}

const Vec3 e1(1, 0, 0);
const Vec3 e3(0, 0, 1);

}  // namespace

TEST_SUITE_BEGIN("shadow");

TEST_CASE("shadow body endpoints: t=1 is K, t=0 is the Steiner symmetral") {
  SphereGrid<3> g = sphere_grid_3(2);
  Body<3> bodies[] = {unit_ball(), diag_ellipsoid(), sheared_ball(), hull<3>(cube_corners())};
  for (const Body<3>& K : bodies) {
    ShadowSystem S = make_shadow_system(K, e3);
    CHECK(sup_distance(shadow_body(S, 1.0), K, g) <= 1e-9);
  }
  // the t=0 graph runs through the same combination code as steiner()
  Body<3> shear = sheared_ball();
  ShadowSystem Ss = make_shadow_system(shear, e3);
  CHECK(sup_distance(shadow_body(Ss, 0.0), steiner(shear, e3), g) <= 1e-12);
  Body<3> cube = hull<3>(cube_corners());
  Vec3 udiag = Vec3(1, 1, 1).normalized();
  ShadowSystem Sc = make_shadow_system(cube, udiag);
  CHECK(sup_distance(shadow_body(Sc, 0.0), steiner(cube, udiag), g) <= 1e-12);
}

TEST_CASE("shadow body at t=-1 is the reflection") {
  SphereGrid<3> g = sphere_grid_3(2);
  Mat3 R = Mat3::Identity() - 2.0 * e3 * e3.transpose();

  Body<3> shear = sheared_ball();
  ShadowSystem S = make_shadow_system(shear, e3);
  Body<3> m1 = shadow_body(S, -1.0);
  CHECK(sup_distance(m1, Body<3>(reflect_graph(S.graph)), g) <= 1e-12);
  // h_{K_-1}(v) = h_K(R_u v); the raw graph support carries the base
  // polygon truncation, so the cross-representation gap stays ~3e-5
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); i += 3) {
    Vec3 v = g.nodes[i];
    worst = std::max(worst, std::abs(support(m1, v) - support(shear, Vec3(R * v))));
  }
  CHECK(worst <= 1e-4);

  // polytope graphs locate base vertices exactly, so the same identity is exact
  Body<3> cube = hull<3>(cube_corners());
  ShadowSystem Sc = make_shadow_system(cube, e3);
  Body<3> cm1 = shadow_body(Sc, -1.0);
  for (std::size_t i = 0; i < g.size(); i += 17)
    CHECK(support(cm1, g.nodes[i]) ==
          doctest::Approx(support(cube, Vec3(R * g.nodes[i]))).epsilon(1e-12));
}

TEST_CASE("shadow parameter outside [-1,1] is rejected") {
  ShadowSystem S = make_shadow_system(unit_ball(), e3);
  CHECK_THROWS_AS((void)shadow_body(S, 1.0000001), std::invalid_argument);
  CHECK_THROWS_AS((void)shadow_body(S, -1.2), std::invalid_argument);
}

TEST_CASE("reflection symmetry R_u(K_t) = K_{-t}") {
  SphereGrid<3> g = sphere_grid_3(2);
  ShadowSystem S = make_shadow_system(sheared_l4(), e3);
  for (double t : {0.25, 0.5, 1.0}) {
    Body<3> bt = shadow_body(S, t);
    GraphBody<3> r = reflect_graph(std::get<GraphBody<3>>(bt));
    CHECK(sup_distance(shadow_body(S, -t), Body<3>(r), g) <= 1e-10);
  }
}

TEST_CASE("perturbation phi matches the closed form a(x_K(theta)) <u,theta>") {
  SphereGrid<3> g = sphere_grid_3(2);
  Mat3 M = shear_matrix();

  // sheared ball: x_K(th) = M M^T th / |M^T th|, a(x) = 0.3 x1
  Body<3> shear = sheared_ball();
  ShadowSystem S = make_shadow_system(shear, e3);
  double worst = 0;
  int flagged = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec3 th = g.nodes[i];
    bool amb = false;
    double phi = perturbation_phi(S, th, &amb);
    Vec3 x = M * Vec3((M.transpose() * th).normalized());
    worst = std::max(worst, std::abs(phi - 0.3 * x.x() * th.z()));
    flagged += int(amb);
  }
  CHECK(worst <= 1e-12);
  CHECK(flagged == 0);

  // same linear form on the sheared l4 ball, support point taken natively
  Body<3> skew = sheared_l4();
  ShadowSystem Sk = make_shadow_system(skew, e3);
  worst = 0;
  for (std::size_t i = 0; i < g.size(); i += 2) {
    Vec3 th = g.nodes[i];
    Vec3 x = support_point(skew, th);
    worst = std::max(worst, std::abs(perturbation_phi(Sk, th) - 0.3 * x.x() * th.z()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("perturbation phi vanishes for symmetric bodies and orthogonal directions") {
  ShadowSystem S = make_shadow_system(diag_ellipsoid(), e3);  // f = -g, a = 0
  SphereGrid<3> g = sphere_grid_3(1);
  for (std::size_t i = 0; i < g.size(); i += 5) CHECK(perturbation_phi(S, g.nodes[i]) == 0.0);

  // <u,theta> = 0 forces phi = 0 regardless of the body
  ShadowSystem Ss = make_shadow_system(sheared_ball(), e3);
  CHECK(perturbation_phi(Ss, e1) == 0.0);
  CHECK(perturbation_phi(Ss, Vec3(-3, 4, 0).normalized()) == 0.0);
  ShadowSystem Sk = make_shadow_system(sheared_l4(), e3);
  CHECK(perturbation_phi(Sk, e1) == 0.0);
}

TEST_CASE("ambiguous support maximizers are flagged") {
  Body<3> cube = hull<3>(cube_corners());
  ShadowSystem S = make_shadow_system(cube, e3);
  bool amb = false;
  (void)perturbation_phi(S, e3, &amb);  // a whole face maximizes
  CHECK(amb);
  (void)perturbation_phi(S, Vec3(1, 1, 1).normalized(), &amb);  // unique corner
  CHECK(!amb);
}

TEST_CASE("difference quotients converge to phi (admissibility traces)") {
  SphereGrid<3> g = sphere_grid_3(2);
  std::vector<double> ts = {0.9, 0.99, 0.999};

  // ellipsoid with u = e3: f = -g exactly, so quotients and phi both vanish
  ShadowSystem Se = make_shadow_system(diag_ellipsoid(), e3);
  PerturbationTrace tre = check_admissible(Se, ts, g);
  REQUIRE(tre.sup_dev.size() == 3);
  REQUIRE(tre.quotients.size() == 3);
  REQUIRE(tre.quotients[0].size() == g.size());
  REQUIRE(tre.phi.size() == g.size());
  for (double d : tre.sup_dev) CHECK(d <= 1e-2);
  CHECK(tre.sup_dev[2] <= tre.sup_dev[0]);

  ShadowSystem Sb = make_shadow_system(unit_ball(), e3);
  for (double d : check_admissible(Sb, ts, g).sup_dev) CHECK(d <= 1e-9);

  // off-axis u makes the trace genuinely converge, linearly in (1-t)
  ShadowSystem So = make_shadow_system(diag_ellipsoid(), Vec3(1, 2, 2).normalized());
  PerturbationTrace tro = check_admissible(So, ts, g);
  CHECK(tro.sup_dev[0] <= 2e-2);
  CHECK(tro.sup_dev[1] <= 0.2 * tro.sup_dev[0]);
  CHECK(tro.sup_dev[2] <= 0.2 * tro.sup_dev[1]);
  CHECK(tro.sup_dev[2] <= 3e-4);

  ShadowSystem Ss = make_shadow_system(sheared_ball(), e3);
  PerturbationTrace trs = check_admissible(Ss, ts, g);
  CHECK(trs.sup_dev[0] <= 1e-2);
  CHECK(trs.sup_dev[1] < trs.sup_dev[0]);
  CHECK(trs.sup_dev[2] < trs.sup_dev[1]);
  CHECK(trs.sup_dev[2] <= 1e-4);

  // graph support search noise floors the last step near t -> 1
  ShadowSystem Sk = make_shadow_system(sheared_l4(), e1);
  PerturbationTrace trk = check_admissible(Sk, ts, g);
  CHECK(trk.sup_dev[0] <= 1e-1);
  CHECK(trk.sup_dev[1] < trk.sup_dev[0]);
  CHECK(trk.sup_dev[2] < trk.sup_dev[1]);
  CHECK(trk.sup_dev[2] <= 1e-2);

  CHECK_THROWS_AS((void)check_admissible(Se, {0.9, 1.0}, g), std::invalid_argument);
  CHECK_THROWS_AS((void)check_admissible(Se, {-0.1}, g), std::invalid_argument);
}

TEST_CASE("admissibility deviations are antipodally paired for symmetric bodies") {
  SphereGrid<3> g = sphere_grid_3(2);
  ShadowSystem S = make_shadow_system(sheared_l4(), e3);
  PerturbationTrace tr = check_admissible(S, {0.9}, g);
  std::size_t pairs = 0;
  double worst = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if ((g.nodes[i] + g.nodes[j]).norm() <= 1e-9) {
        double di = std::abs(tr.quotients[0][i] - tr.phi[i]);
        double dj = std::abs(tr.quotients[0][j] - tr.phi[j]);
        worst = std::max(worst, std::abs(di - dj));
        ++pairs;
      }
  CHECK(pairs == g.size() / 2);
  CHECK(worst <= 1e-10);
}

TEST_CASE("surface integral of phi vanishes") {
  // ball and axis-aligned ellipsoid: phi is identically zero
  CHECK(phi_surface_integral(make_shadow_system(unit_ball(), e3)) == 0.0);
  CHECK(std::abs(phi_surface_integral(make_shadow_system(diag_ellipsoid(), e3))) <= 1e-15);

  MeasureOptions l3, l4;
  l3.sphere_level = 3;
  l4.sphere_level = 4;

  ShadowSystem Ss = make_shadow_system(sheared_ball(), e3);
  double mass = surface_measure(Ss.K, l3).total();
  CHECK(std::abs(phi_surface_integral(Ss, l3)) <= 1e-4);
  CHECK(std::abs(phi_surface_integral(Ss, l3)) <= 1e-6 * mass);
  CHECK(std::abs(phi_surface_integral(Ss, l4)) <= 1e-6 * mass);

  // flat spots of the l4 surface slow the quadrature; still zero in the limit
  ShadowSystem Sk = make_shadow_system(sheared_l4(), e3);
  double i3 = phi_surface_integral(Sk, l3);
  double i4 = phi_surface_integral(Sk, l4);
  CHECK(std::abs(i3) <= 1e-3);
  CHECK(std::abs(i4) <= 2e-4);
  CHECK(std::abs(i4) < std::abs(i3));
}

TEST_CASE("first variation of the polar projection volume") {
  SphereGrid<3> g3 = sphere_grid_3(3);
  std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};

  CHECK(std::abs(first_variation_polar_pi(make_shadow_system(unit_ball(), e3), 2.0, steps,
                                          g3)) <= 1e-9);

  // shadow system of an ellipsoid is an SL shear; the volume is constant in t
  Body<3> ell = diag_ellipsoid();
  ShadowSystem Se = make_shadow_system(ell, Vec3(1, 2, 2).normalized());
  double ve = first_variation_polar_pi(Se, 2.0, steps, g3);
  CHECK(std::abs(ve) <= 5e-3 * volume_exact(ell));
  CHECK(std::abs(ve) <= 2e-3);
  ShadowSystem Ss = make_shadow_system(sheared_ball(), e3);
  CHECK(std::abs(first_variation_polar_pi(Ss, 2.0, steps, g3)) <= 2e-4);

  // sheared l4 ball with u across the shear: symmetrization strictly grows
  // the polar volume, so the one-sided derivative at t=1 is negative
  ShadowSystem Sk = make_shadow_system(sheared_l4(), e1);
  double vk = first_variation_polar_pi(Sk, 2.0, steps, g3);
  CHECK(vk < 0.0);
  CHECK(vk <= -0.2);
  CHECK(vk >= -0.35);
  double vk15 = first_variation_polar_pi(Sk, 1.5, steps, sphere_grid_3(2));
  CHECK(vk15 <= -0.15);

  // raw quotients at single steps stay near the extrapolated value
  double q1 = first_variation_polar_pi(Sk, 2.0, {1e-2}, g3);
  double q2 = first_variation_polar_pi(Sk, 2.0, {2.5e-3}, g3);
  CHECK(std::abs(q1 - vk) <= 2e-2);
  CHECK(std::abs(q2 - vk) <= 2e-2);

  CHECK_THROWS_AS((void)first_variation_polar_pi(Se, 2.0, {}, g3), std::invalid_argument);
  CHECK_THROWS_AS((void)first_variation_polar_pi(Se, 2.0, {3.0}, g3), std::invalid_argument);
  CHECK_THROWS_AS((void)first_variation_polar_pi(Se, 2.0, {0.0}, g3), std::invalid_argument);
}

TEST_CASE("volume is invariant along the shadow system") {
  std::vector<double> tg;
  for (int i = 0; i <= 10; ++i) tg.push_back(-1.0 + 0.2 * i);

  CHECK(volume_invariance_check(make_shadow_system(unit_ball(), e3), tg) == 0.0);
  CHECK(volume_invariance_check(make_shadow_system(sheared_ball(), e3), tg) <= 1e-12);
  CHECK(volume_invariance_check(make_shadow_system(sheared_l4(), e1), tg) <= 1e-12);

  MeasureOptions o4;
  o4.base_level = 4;
  ShadowSystem Sc = make_shadow_system(hull<3>(cube_corners()), Vec3(1, 1, 1).normalized());
  CHECK(volume_invariance_check(Sc, tg, o4) <= 1e-8);
}

TEST_CASE("shadow bodies move Lipschitz-continuously in t") {
  SphereGrid<3> g = sphere_grid_3(1);
  ShadowSystem S = make_shadow_system(sheared_l4(), e1);
  double lo = 1e9, hi = 0;
  for (double t = -1.0; t < 0.99; t += 0.25) {
    double d = sup_distance(shadow_body(S, t), shadow_body(S, t + 0.25), g) / 0.25;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(hi <= 0.5);
  CHECK(hi <= 2.0 * lo);

  ShadowSystem S3 = make_shadow_system(sheared_l4(), e3);
  lo = 1e9, hi = 0;
  for (double t = -1.0; t < 0.99; t += 0.25) {
    double d = sup_distance(shadow_body(S3, t), shadow_body(S3, t + 0.25), g) / 0.25;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(hi <= 0.3);
  CHECK(hi <= 1.25 * lo);
}

TEST_CASE("f_t stays concave for t in [-1,1]") {
  ShadowSystem S = make_shadow_system(sheared_l4(), e1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (double t : {-1.0, -0.5, 0.3, 0.8, 1.0}) {
    Body<3> bt = shadow_body(S, t);
    const GraphBody<3>& gb = std::get<GraphBody<3>>(bt);
    for (int k = 0; k < 120; ++k) {
      Vec2 x(U(rng), U(rng)), y(U(rng), U(rng));
      double mid = gb.f(Vec2(0.5 * (x + y)));
      CHECK(mid >= 0.5 * (gb.f(x) + gb.f(y)) - 1e-10);
    }
  }
}

TEST_CASE("shadow sweep rows track volume, polar volume and deviation") {
  SphereGrid<3> g = sphere_grid_3(2);
  ShadowSystem S = make_shadow_system(sheared_l4(), e1);
  auto rows = shadow_sweep(S, 2.0, {0.0, 0.5, 1.0}, g);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].t == 0.0);
  CHECK(rows[2].t == 1.0);
  CHECK(rows[1].vol_kt == doctest::Approx(rows[0].vol_kt).epsilon(1e-12));
  CHECK(rows[2].vol_kt == doctest::Approx(rows[0].vol_kt).epsilon(1e-12));
  // polar volume decreases from the symmetral toward the skewed body
  CHECK(rows[0].vol_polar_pi > rows[1].vol_polar_pi);
  CHECK(rows[1].vol_polar_pi > rows[2].vol_polar_pi);
  CHECK(rows[0].vol_polar_pi == doctest::Approx(3.0597).epsilon(1e-3));
  CHECK(rows[2].vol_polar_pi == doctest::Approx(2.9173).epsilon(1e-3));
  // the t=1 row matches the direct polar volume of the input body
  CHECK(rows[2].vol_polar_pi ==
        doctest::Approx(polar_pi_volume(sheared_l4(), 2.0, g)).epsilon(1e-4));
  CHECK(rows[2].phi_sup_dev == 0.0);
  CHECK(rows[0].phi_sup_dev > rows[1].phi_sup_dev);
}

TEST_SUITE_END();
