#include "lpbmk/body_io.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpbmk {

namespace {

using nlohmann::ordered_json;

void reject_unknown(const ordered_json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw std::invalid_argument("body spec: unexpected field: " + key);
  }
}

Vec3 parse_point(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("body spec: point must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw std::invalid_argument("body spec: point entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

GraphBody<3> lq_ball_body(double q, double scale, int base_samples) {
  if (!(q > 1.0)) throw std::invalid_argument("lq ball: requires q > 1");
  if (!(scale > 0.0)) throw std::invalid_argument("lq ball: requires scale > 0");
  GraphBody<3> K;
  K.u = Vec3(0, 0, 1);
  K.frame = orthonormal_frame<3>(K.u);
  K.gauge = std::make_shared<Gauge<3>>(lq_gauge<3>(q, scale));
  const int m = std::max(8, base_samples);
  K.base.reserve(m);
  for (int j = 0; j < m; ++j) {
    const double psi = 2.0 * pi * j / m;
    const double c = std::cos(psi), s = std::sin(psi);
    const double r = scale / std::pow(std::pow(std::abs(c), q) + std::pow(std::abs(s), q), 1.0 / q);
    K.base.push_back(Vec2(r * c, r * s));
  }
  // closed-form graphs: f = scale * (1 - sum |x_i/scale|^q)^{1/q}
  auto rest = [q, scale](const Vec2& x) {
    return 1.0 - std::pow(std::abs(x.x()) / scale, q) - std::pow(std::abs(x.y()) / scale, q);
  };
  const auto base = K.base;
  const double eps = 1e-9 * scale;
  auto check = [base, eps](const Vec2& x) {
    if (!point_in_convex_polygon(base, x, eps))
      throw std::domain_error("graph evaluator: point outside base");
  };
  K.f = [q, scale, rest, check](const Vec2& x) {
    check(x);
    return scale * std::pow(std::max(rest(x), 0.0), 1.0 / q);
  };
  K.g = [f = K.f](const Vec2& x) { return -f(x); };
  K.fgrad = [q, scale, rest](const Vec2& x) {
    const double R = std::max(rest(x), 1e-14);
    const double c = std::pow(R, 1.0 / q - 1.0);
    auto comp = [&](double xi) {
      return -c * std::pow(std::abs(xi) / scale, q - 1.0) * (xi >= 0 ? 1.0 : -1.0);
    };
    return Vec2(comp(x.x()), comp(x.y()));
  };
  K.ggrad = [fg = K.fgrad](const Vec2& x) { return Vec2(-fg(x)); };
  return K;
}

Body<3> parse_body(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("body spec: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("body spec: top level must be an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw std::invalid_argument("body spec: missing string field: kind");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "polytope") {
    reject_unknown(j, {"kind", "vertices"});
    if (!j.contains("vertices") || !j["vertices"].is_array())
      throw std::invalid_argument("body spec: polytope needs a vertices array");
    std::vector<Vec3> pts;
    pts.reserve(j["vertices"].size());
    for (const auto& e : j["vertices"]) pts.push_back(parse_point(e));
    Polytope<3> P = hull<3>(pts);
    for (const auto& f : P.facets())
      if (f.offset <= 0.0)
        throw std::invalid_argument("body spec: origin not strictly interior");
    return P;
  }
  if (kind == "ellipsoid") {
    reject_unknown(j, {"kind", "matrix"});
    if (!j.contains("matrix") || !j["matrix"].is_array() || j["matrix"].size() != 3)
      throw std::invalid_argument("body spec: ellipsoid needs a 3x3 matrix");
    Mat3 A;
    for (int r = 0; r < 3; ++r) {
      const auto& row = j["matrix"][r];
      if (!row.is_array() || row.size() != 3)
        throw std::invalid_argument("body spec: ellipsoid needs a 3x3 matrix");
      for (int c = 0; c < 3; ++c) {
        if (!row[c].is_number())
          throw std::invalid_argument("body spec: matrix entries must be numbers");
        A(r, c) = row[c].get<double>();
      }
    }
    return Ellipsoid<3>(A);
  }
  if (kind == "lq_ball") {
    reject_unknown(j, {"kind", "q", "scale"});
    if (!j.contains("q") || !j["q"].is_number())
      throw std::invalid_argument("body spec: lq_ball needs a numeric q");
    if (!j.contains("scale") || !j["scale"].is_number())
      throw std::invalid_argument("body spec: lq_ball needs a numeric scale");
    return lq_ball_body(j["q"].get<double>(), j["scale"].get<double>());
  }
  throw std::invalid_argument("body spec: unknown kind: " + kind);
}

Body<3> load_body(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open body spec: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_body(ss.str());
}

std::string body_to_json(const Body<3>& K) {
  ordered_json j;
  if (const auto* P = std::get_if<Polytope<3>>(&K)) {
    j["kind"] = "polytope";
    auto& verts = j["vertices"] = ordered_json::array();
    for (const auto& v : P->vertices()) verts.push_back({v.x(), v.y(), v.z()});
  } else if (const auto* E = std::get_if<Ellipsoid<3>>(&K)) {
    j["kind"] = "ellipsoid";
    auto& rows = j["matrix"] = ordered_json::array();
    for (int r = 0; r < 3; ++r)
      rows.push_back({E->matrix()(r, 0), E->matrix()(r, 1), E->matrix()(r, 2)});
  } else {
    // graph bodies have no closed spec: emit an inscribed polytope sampled
    // from support points over a sphere grid
    const SphereGrid<3> g = sphere_grid_3(3);
    std::vector<Vec3> pts;
    pts.reserve(g.size());
    const auto& Gb = std::get<GraphBody<3>>(K);
    for (const auto& v : g.nodes) {
      Vec3 x;
      graph_support(Gb, v, &x);
      pts.push_back(x);
    }
    Polytope<3> P = hull<3>(pts);
    j["kind"] = "polytope";
    auto& verts = j["vertices"] = ordered_json::array();
    for (const auto& v : P.vertices()) verts.push_back({v.x(), v.y(), v.z()});
  }
  return j.dump(2) + "\n";
}

void save_body(const Body<3>& K, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write body spec: " + path);
  out << body_to_json(K);
}

}  // namespace lpbmk
