#include "lpbmk/numgrid.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace lpbmk {

double unit_ball_volume(double r) {
  if (r < 0.0) throw std::domain_error("unit_ball_volume: r must be nonnegative");
  return std::pow(pi, 0.5 * r) / std::tgamma(1.0 + 0.5 * r);
}

double lyz_constant(int n, double p) {
  if (n < 0) throw std::domain_error("lyz_constant: n must be nonnegative");
  if (p <= 1.0) throw std::domain_error("lyz_constant: requires p > 1");
  return unit_ball_volume(n + p) /
         (unit_ball_volume(2) * unit_ball_volume(n) * unit_ball_volume(p - 1.0));
}

double bp_constant(int n) {
  if (n < 3) throw std::domain_error("bp_constant: requires n >= 3");
  // 2*B((n-1)/2, 1/2)
  const double a = 0.5 * (n - 1);
  return 2.0 * std::tgamma(a) * std::tgamma(0.5) / std::tgamma(a + 0.5);
}

double rolodex_constant(int n, double p) {
  if (n < 3) throw std::domain_error("rolodex_constant: requires n >= 3");
  if (p <= 1.0) throw std::domain_error("rolodex_constant: requires p > 1");
  const double nwn = n * unit_ball_volume(n);
  return nwn * std::pow(nwn * lyz_constant(n - 2, p), double(n) / p) / bp_constant(n);
}

Quadrature1D gauss_legendre(int m, double lo, double hi) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m must be positive");
  Quadrature1D q;
  q.lo = lo;
  q.hi = hi;
  q.x.resize(m);
  q.w.resize(m);
  const double c = 0.5 * (hi - lo), d = 0.5 * (hi + lo);
  for (int k = 0; k < (m + 1) / 2; ++k) {
    double x = std::cos(pi * (k + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_m(x) and P'_m(x)
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= m; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = m * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.x[k] = d - c * x;
    q.w[k] = c * w;
    q.x[m - 1 - k] = d + c * x;
    q.w[m - 1 - k] = c * w;
  }
  return q;
}

SphereGrid<2> sphere_grid_2(int level) {
  if (level < 0) throw std::invalid_argument("sphere_grid: level must be >= 0");
  const int m = 16 << level;
  SphereGrid<2> g;
  g.level = level;
  g.nodes.reserve(m);
  g.weights.assign(m, 2.0 * pi / m);
  for (int j = 0; j < m; ++j) {
    const double a = 2.0 * pi * (j + 0.5) / m;
    g.nodes.push_back(Vec2(std::cos(a), std::sin(a)));
  }
  return g;
}

namespace {

struct Tri {
  Vec3 a, b, c;
};

std::vector<Tri> icosahedron_faces() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Vec3 v[12] = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (auto& x : v) x.normalize();
  static const int f[20][3] = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  std::vector<Tri> out;
  out.reserve(20);
  for (auto& idx : f) out.push_back({v[idx[0]], v[idx[1]], v[idx[2]]});
  return out;
}

double spherical_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double num = std::abs(a.dot(b.cross(c)));
  const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
  return 2.0 * std::atan2(num, den);
}

}  // namespace

SphereGrid<3> sphere_grid_3(int level) {
  if (level < 0) throw std::invalid_argument("sphere_grid: level must be >= 0");
  std::vector<Tri> tris = icosahedron_faces();
  for (int l = 0; l < level; ++l) {
    std::vector<Tri> next;
    next.reserve(tris.size() * 4);
    for (const Tri& t : tris) {
      Vec3 ab = (t.a + t.b).normalized();
      Vec3 bc = (t.b + t.c).normalized();
      Vec3 ca = (t.c + t.a).normalized();
      next.push_back({t.a, ab, ca});
      next.push_back({t.b, bc, ab});
      next.push_back({t.c, ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris.swap(next);
  }
  SphereGrid<3> g;
  g.level = level;
  g.nodes.reserve(tris.size());
  g.weights.reserve(tris.size());
  for (const Tri& t : tris) {
    g.nodes.push_back((t.a + t.b + t.c).normalized());
    g.weights.push_back(spherical_area(t.a, t.b, t.c));
  }
  return g;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("bisect: tol must be positive");
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("bisect: no sign change on bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at rounding limit
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {
std::atomic<int> g_jobs{0};
}

void set_jobs(int j) { g_jobs.store(j < 1 ? 0 : j); }

int jobs() {
  const int j = g_jobs.load();
  if (j > 0) return j;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t nw = std::min<std::size_t>(std::size_t(jobs()), count);
  if (nw <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t b = w * count / nw, e = (w + 1) * count / nw;
      try {
        for (std::size_t i = b; i < e; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace lpbmk
