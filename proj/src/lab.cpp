#include "lpbmk/lab.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpbmk {

using nlohmann::ordered_json;

CheckRecord make_record(std::string name, double value, double tol) {
  CheckRecord r;
  r.name = std::move(name);
  r.value = value;
  r.tol = tol;
  r.pass = value <= tol;
  return r;
}

CheckRecord petty_steiner_check(const Body<3>& K, const Vec3& u, double p,
                                const SphereGrid<3>& grid, const MeasureOptions& opt,
                                double tol) {
  double vk = polar_pi_volume(K, p, grid, opt);
  double vs = polar_pi_volume(steiner(K, u), p, grid, opt);
  return make_record("petty_steiner_deficit", vk - vs, tol);
}

double midpoint_coplanarity(const Body<3>& K, const Vec3& u, int base_level) {
  GraphBody<3> G = graph_functions(K, u);
  auto mesh = G.ensure_mesh(base_level);

  std::vector<Vec2> xs;
  std::vector<double> ms;
  for (const auto& c : mesh->cells) {
    xs.push_back(c.centroid);
    ms.push_back(0.5 * (G.f(c.centroid) + G.g(c.centroid)));
  }
  if (xs.size() < 4) throw std::invalid_argument("midpoint fit: base mesh too coarse");

  Eigen::MatrixXd D(xs.size(), 3);
  Eigen::VectorXd b(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    D(i, 0) = xs[i].x();
    D(i, 1) = xs[i].y();
    D(i, 2) = 1.0;
    b(i) = ms[i];
  }
  Eigen::Vector3d beta = D.colPivHouseholderQr().solve(b);

  double dev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    dev = std::max(dev, std::abs(ms[i] - (beta(0) * xs[i].x() + beta(1) * xs[i].y() +
                                          beta(2))));

  const SphereGrid<3> g = sphere_grid_3(2);
  double diam = 0.0;
  for (const auto& v : g.nodes)
    diam = std::max(diam, support(K, v) + support(K, Vec3(-v)));
  return dev / diam;
}

EllipsoidFit ellipsoid_fit(const Body<3>& K, const SphereGrid<3>& grid,
                           double sym_tol) {
  Eigen::Matrix<double, 6, 6> ata = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> atb = Eigen::Matrix<double, 6, 1>::Zero();
  for (const auto& v : grid.nodes) {
    double h = support(K, v);
    if (std::abs(h - support(K, Vec3(-v))) > sym_tol * h)
      throw std::invalid_argument("ellipsoid fit: body is not origin-symmetric");
    Eigen::Matrix<double, 6, 1> row;
    row << v.x() * v.x(), v.y() * v.y(), v.z() * v.z(), 2.0 * v.x() * v.y(),
        2.0 * v.x() * v.z(), 2.0 * v.y() * v.z();
    ata += row * row.transpose();
    atb += row * (h * h);
  }
  Eigen::Matrix<double, 6, 1> m = ata.ldlt().solve(atb);
  Mat3 M;
  M << m(0), m(3), m(4), m(3), m(1), m(5), m(4), m(5), m(2);

  Eigen::SelfAdjointEigenSolver<Mat3> es(M);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("ellipsoid fit: fitted form is not positive definite");
  EllipsoidFit out;
  out.A = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
          es.eigenvectors().transpose();
  for (const auto& v : grid.nodes) {
    double h = support(K, v);
    out.residual = std::max(out.residual, std::abs(h - (out.A * v).norm()) / h);
  }
  return out;
}

ExperimentReport rigidity_experiment(const Body<3>& K, double p,
                                     const std::vector<Vec3>& us,
                                     const SphereGrid<3>& grid,
                                     const MeasureOptions& opt,
                                     const std::string& body_echo) {
  ExperimentReport rep;
  rep.experiment = "rigidity";
  rep.body = body_echo;
  rep.p = p;
  rep.directions = us;
  rep.sphere_level = opt.sphere_level;
  rep.base_level = opt.base_level;

  FixedPoint fp = fixed_point_residual(K, p, grid, opt);
  rep.records.push_back(make_record("fixed_point_residual", fp.residual, 1e-3));
  rep.records.push_back(
      make_record("ellipsoid_fit_residual", ellipsoid_fit(K, grid).residual, 1e-6));

  const double vol = volume_exact(K, opt);
  const std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};
  const std::vector<double> ts = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < us.size(); ++i) {
    const std::string tag = "[" + std::to_string(i) + "]";
    ShadowSystem S = make_shadow_system(K, us[i]);
    double fv = first_variation_polar_pi(S, p, steps, grid, opt);
    rep.records.push_back(
        make_record("first_variation" + tag, std::abs(fv), 5e-3 * vol));

    auto rows = shadow_sweep(S, p, ts, grid, opt);
    double polar1 = rows.back().vol_polar_pi;
    double dev = 0.0;
    for (const auto& r : rows) dev = std::max(dev, std::abs(r.vol_polar_pi - polar1));
    rep.records.push_back(make_record("constancy" + tag, dev, 1e-2 * polar1));
    rep.records.push_back(
        make_record("coplanarity" + tag, midpoint_coplanarity(K, us[i]), 1e-6));

    NamedSweep sw;
    sw.name = "sweep_u" + std::to_string(i);
    sw.rows = std::move(rows);
    rep.sweeps.push_back(std::move(sw));
  }
  return rep;
}

std::vector<Vec3> default_directions() {
  std::vector<Vec3> us;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e(i) = 1.0;
    us.push_back(e);
    us.push_back(Vec3(-e));
  }
  const double d = 1.0 / std::sqrt(3.0);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) us.push_back(Vec3(sx * d, sy * d, sz * d));
  return us;
}

std::vector<IterateStep> iterate_operator(const Body<3>& K0, double p, int steps,
                                          const SphereGrid<3>& grid,
                                          const MeasureOptions& opt) {
  if (steps < 0) throw std::invalid_argument("iterate_operator: negative step count");
  std::vector<IterateStep> traj;
  Body<3> K = K0;
  double gap = 0.0;
  bool repaired = false;
  for (int j = 0; j <= steps; ++j) {
    IterateStep st;
    st.h.grid = grid;
    st.h.source = j == 0 ? "input" : "gamma_polar_pi";
    st.h.values.reserve(grid.nodes.size());
    for (const auto& v : grid.nodes) st.h.values.push_back(support(K, v));
    st.ellipsoid_residual = ellipsoid_fit(K, grid).residual;
    st.fp = fixed_point_residual(K, p, grid, opt);
    st.convexity_gap = gap;
    st.repaired = repaired;
    traj.push_back(std::move(st));
    if (j == steps) break;

    SampledSupport<3> gm = gamma_polar_pi(K, p, grid, opt);
    // largest body with support <= gm at the nodes: intersection of the
    // sampled halfspaces, realized by hulling the facet duals of the hull
    // of the polar samples
    std::vector<Vec3> polar_pts;
    polar_pts.reserve(gm.values.size());
    for (std::size_t i = 0; i < gm.values.size(); ++i)
      polar_pts.push_back(Vec3(grid.nodes[i] / gm.values[i]));
    Polytope<3> P = hull<3>(polar_pts);
    std::vector<Vec3> duals;
    duals.reserve(P.facets().size());
    for (const auto& f : P.facets()) duals.push_back(Vec3(f.normal / f.offset));
    Polytope<3> W = hull<3>(duals);

    gap = 0.0;
    for (std::size_t i = 0; i < gm.values.size(); ++i)
      gap = std::max(gap,
                     (gm.values[i] - W.support(grid.nodes[i])) / gm.values[i]);
    repaired = gap > 1e-6;

    double lam = std::pow(W.volume(), -1.0 / 3.0);
    K = apply_linear(Body<3>(W), Mat3(lam * Mat3::Identity()));
  }
  return traj;
}

namespace {

std::string fmt_row(std::initializer_list<double> xs) {
  std::string line;
  char buf[32];
  for (double x : xs) {
    if (!line.empty()) line += ',';
    std::snprintf(buf, sizeof buf, "%.17g", x);
    line += buf;
  }
  line += '\n';
  return line;
}

std::vector<std::vector<double>> parse_csv_body(const std::string& text,
                                                const std::string& header,
                                                std::size_t cols) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::invalid_argument("csv: expected header " + header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != cols)
      throw std::invalid_argument("csv: malformed row: " + line);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string sweep_csv(const std::vector<ShadowSweepRow>& rows) {
  std::string out = "t,vol_Kt,vol_polar_pi\n";
  for (const auto& r : rows) out += fmt_row({r.t, r.vol_kt, r.vol_polar_pi});
  return out;
}

std::vector<ShadowSweepRow> parse_sweep_csv(const std::string& text) {
  std::vector<ShadowSweepRow> rows;
  for (const auto& r : parse_csv_body(text, "t,vol_Kt,vol_polar_pi", 3)) {
    ShadowSweepRow row;
    row.t = r[0];
    row.vol_kt = r[1];
    row.vol_polar_pi = r[2];
    rows.push_back(row);
  }
  return rows;
}

std::string profile_csv(const SectionProfile& prof) {
  std::string out = "s,length\n";
  for (std::size_t i = 0; i < prof.s.size(); ++i)
    out += fmt_row({prof.s[i], prof.lengths[i]});
  return out;
}

SectionProfile parse_profile_csv(const std::string& text) {
  SectionProfile prof;
  for (const auto& r : parse_csv_body(text, "s,length", 2)) {
    prof.s.push_back(r[0]);
    prof.lengths.push_back(r[1]);
  }
  return prof;
}

namespace {

std::string report_stem(const std::string& path) {
  std::string stem = path;
  if (stem.size() >= 5 && stem.compare(stem.size() - 5, 5, ".json") == 0)
    stem.resize(stem.size() - 5);
  return stem;
}

void write_text(const std::string& path, const std::string& text,
                const char* who) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(std::string(who) + ": cannot open " + path);
  out << text;
  if (!out) throw std::runtime_error(std::string(who) + ": write failed on " + path);
}

}  // namespace

ExperimentReport write_report(const ExperimentReport& r, const std::string& path) {
  ExperimentReport out = r;
  out.artifacts.clear();

  const std::string stem = report_stem(path);
  for (const auto& sw : r.sweeps) {
    std::string fname = stem + "_" + sw.name + ".csv";
    write_text(fname, sweep_csv(sw.rows), "write_report");
    out.artifacts.push_back(std::filesystem::path(fname).filename().string());
  }
  for (const auto& pr : r.profiles) {
    std::string fname = stem + "_" + pr.name + ".csv";
    write_text(fname, profile_csv(pr.profile), "write_report");
    out.artifacts.push_back(std::filesystem::path(fname).filename().string());
  }

  ordered_json j;
  j["experiment"] = out.experiment;
  j["body"] = out.body;
  j["params"]["p"] = out.p;
  j["params"]["grids"]["sphere_level"] = out.sphere_level;
  j["params"]["grids"]["base_level"] = out.base_level;
  auto dirs = ordered_json::array();
  for (const auto& u : out.directions) dirs.push_back({u.x(), u.y(), u.z()});
  j["params"]["directions"] = dirs;
  auto recs = ordered_json::array();
  for (const auto& rec : out.records)
    recs.push_back({{"name", rec.name},
                    {"value", rec.value},
                    {"tol", rec.tol},
                    {"pass", rec.pass}});
  j["records"] = recs;
  j["artifacts"] = out.artifacts;
  write_text(path, j.dump(2) + "\n", "write_report");
  return out;
}

ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_report: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ordered_json j = ordered_json::parse(ss.str());

  ExperimentReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.body = j.at("body").get<std::string>();
  r.p = j.at("params").at("p").get<double>();
  r.sphere_level = j.at("params").at("grids").at("sphere_level").get<int>();
  r.base_level = j.at("params").at("grids").at("base_level").get<int>();
  for (const auto& d : j.at("params").at("directions"))
    r.directions.push_back(Vec3(d.at(0).get<double>(), d.at(1).get<double>(),
                                d.at(2).get<double>()));
  for (const auto& rec : j.at("records")) {
    CheckRecord c;
    c.name = rec.at("name").get<std::string>();
    c.value = rec.at("value").get<double>();
    c.tol = rec.at("tol").get<double>();
    c.pass = rec.at("pass").get<bool>();
    r.records.push_back(std::move(c));
  }

  const std::string prefix =
      std::filesystem::path(report_stem(path)).filename().string() + "_";
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  for (const auto& a : j.at("artifacts")) {
    std::string name = a.get<std::string>();
    r.artifacts.push_back(name);
    std::ifstream af(dir / name, std::ios::binary);
    if (!af) throw std::runtime_error("read_report: cannot open " + (dir / name).string());
    std::stringstream as;
    as << af.rdbuf();
    std::string text = as.str();
    std::string label = name;
    if (label.rfind(prefix, 0) == 0) label = label.substr(prefix.size());
    if (label.size() >= 4 && label.compare(label.size() - 4, 4, ".csv") == 0)
      label.resize(label.size() - 4);
    if (text.rfind("t,vol_Kt", 0) == 0) {
      NamedSweep sw;
      sw.name = label;
      sw.rows = parse_sweep_csv(text);
      r.sweeps.push_back(std::move(sw));
    } else {
      NamedProfile pr;
      pr.name = label;
      pr.profile = parse_profile_csv(text);
      r.profiles.push_back(std::move(pr));
    }
  }
  return r;
}

}  // namespace lpbmk
