// command line front end: body specs in, operator tables and reports out
#include "lpbmk/body_io.hpp"
#include "lpbmk/lab.hpp"
#include "lpbmk/rolodex.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using namespace lpbmk;
namespace fs = std::filesystem;

struct RunConfig {
  std::string body;
  std::string out;
  std::string tgrid;
  std::string amap;    // covariance map, diag:a,b,c or mat:nine numbers
  std::string config;  // JSON file filling in flags that were not passed
  std::vector<std::string> us;
  double p = 2.0;
  int level = 2;
  int base_level = 5;
  int angles = 8;
  int scount = 48;
  int steps = 3;
  int jobs = 0;  // 0 = hardware concurrency
  unsigned seed = 7;
  bool level_given = false;  // --level or config "level" present
};

std::string g10(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

[[noreturn]] void usage_error(const std::string& msg) {
  throw std::invalid_argument(msg);
}

Vec3 parse_vec3(const std::string& s, const char* field) {
  std::istringstream in(s);
  Vec3 v;
  char c1 = 0, c2 = 0;
  if (!(in >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',' ||
      !(in >> std::ws).eof())
    usage_error(std::string(field) + ": expected x,y,z");
  return v;
}

std::vector<double> parse_tgrid(const std::string& s) {
  double a = 0, b = 0;
  int n = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(s);
  if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' ||
      !(in >> std::ws).eof() || n < 1)
    usage_error("tgrid: expected a:b:n with n >= 1");
  std::vector<double> ts;
  if (n == 1) {
    ts.push_back(a);
    return ts;
  }
  for (int i = 0; i < n; ++i) ts.push_back(a + (b - a) * i / (n - 1));
  return ts;
}

Mat3 parse_map(const std::string& s) {
  auto nums = [](const std::string& body, std::size_t want, const char* what) {
    std::vector<double> v;
    std::istringstream in(body);
    std::string cell;
    while (std::getline(in, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        usage_error(std::string("A: bad number in ") + what);
      }
    }
    if (v.size() != want) usage_error(std::string("A: ") + what);
    return v;
  };
  if (s.rfind("diag:", 0) == 0) {
    auto v = nums(s.substr(5), 3, "diag needs 3 numbers");
    return Vec3(v[0], v[1], v[2]).asDiagonal();
  }
  if (s.rfind("mat:", 0) == 0) {
    auto v = nums(s.substr(4), 9, "mat needs 9 numbers");
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = v[3 * r + c];
    return A;
  }
  usage_error("A: expected diag:a,b,c or mat:a11,...,a33");
}

void validate(const RunConfig& cfg) {
  if (!(cfg.p > 1.0 && cfg.p <= 10.0)) usage_error("p: must be in (1, 10]");
  if (cfg.level < 0) usage_error("level: must be >= 0");
  if (cfg.base_level < 0) usage_error("base-level: must be >= 0");
  if (cfg.angles < 1) usage_error("angles: must be >= 1");
  if (cfg.scount < 1) usage_error("scount: must be >= 1");
  if (cfg.jobs < 0) usage_error("jobs: must be >= 1");
  if (cfg.steps < 0) usage_error("steps: must be >= 0");
}

// flags beat the config file; the config file beats built-in defaults
void merge_config(const CLI::App* sc, RunConfig& cfg) {
  if (cfg.config.empty()) return;
  std::ifstream in(cfg.config);
  if (!in) usage_error("config: cannot open " + cfg.config);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    usage_error("config: invalid JSON: " + std::string(e.what()));
  }
  auto unset = [sc](const char* flag) {
    const CLI::Option* o = sc->get_option_no_throw(flag);
    return o != nullptr && o->count() == 0;
  };
  for (const auto& [key, val] : j.items()) {
    if (key == "p" && unset("--p")) cfg.p = val.get<double>();
    else if (key == "level" && unset("--level")) {
      cfg.level = val.get<int>();
      cfg.level_given = true;
    }
    else if (key == "base_level" && unset("--base-level")) cfg.base_level = val.get<int>();
    else if (key == "angles" && unset("--angles")) cfg.angles = val.get<int>();
    else if (key == "scount" && unset("--scount")) cfg.scount = val.get<int>();
    else if (key == "tgrid" && unset("--tgrid")) cfg.tgrid = val.get<std::string>();
    else if (key == "seed" && unset("--seed")) cfg.seed = val.get<unsigned>();
    else if (key == "jobs" && unset("--jobs")) cfg.jobs = val.get<int>();
    else if (key == "steps" && unset("--steps")) cfg.steps = val.get<int>();
    else if (key == "out" && unset("--out")) cfg.out = val.get<std::string>();
    else if (key == "p" || key == "level" || key == "base_level" || key == "angles" ||
             key == "scount" || key == "tgrid" || key == "seed" || key == "jobs" ||
             key == "steps" || key == "out")
      ;  // flag was passed explicitly, keep it
    else
      usage_error("config: unknown key: " + key);
  }
}

MeasureOptions options_for(const RunConfig& cfg) {
  MeasureOptions opt;
  opt.sphere_level = cfg.level + 1;  // boundary quadrature one notch above the grid
  opt.base_level = cfg.base_level;
  return opt;
}

std::vector<Vec3> directions_for(const RunConfig& cfg, std::size_t fallback) {
  std::vector<Vec3> us;
  for (const auto& s : cfg.us) {
    Vec3 u = parse_vec3(s, "u");
    if (u.norm() <= 0.0) usage_error("u: must be nonzero");
    us.push_back(u.normalized());
  }
  if (us.empty()) {
    auto all = default_directions();
    us.assign(all.begin(), all.begin() + std::min(fallback, all.size()));
  }
  return us;
}

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir = cfg.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw std::runtime_error("out: cannot create directory " + dir.string());
  return dir;
}

// independent tasks; each worker owns its state, nothing is shared
void parallel_for(int jobs, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  jobs = int(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

void print_records(const ExperimentReport& rep) {
  for (const auto& r : rep.records)
    std::printf("%-28s %-14s tol %-12s %s\n", r.name.c_str(), g10(r.value).c_str(),
                g10(r.tol).c_str(), r.pass ? "PASS" : "FAIL");
}

bool all_pass(const ExperimentReport& rep) {
  for (const auto& r : rep.records)
    if (!r.pass) return false;
  return true;
}

ExperimentReport report_shell(const RunConfig& cfg, const std::string& experiment,
                              const std::vector<Vec3>& us) {
  ExperimentReport rep;
  rep.experiment = experiment;
  rep.body = cfg.body;
  rep.p = cfg.p;
  rep.sphere_level = cfg.level;
  rep.base_level = cfg.base_level;
  rep.directions = us;
  return rep;
}

int cmd_op(const std::string& action, const RunConfig& cfg) {
  Body<3> K = load_body(cfg.body);
  SphereGrid<3> grid = sphere_grid_3(cfg.level);
  MeasureOptions opt = options_for(cfg);

  if (action == "volume") {
    std::printf("%s\n", g10(volume_exact(K, opt)).c_str());
    return 0;
  }
  if (action == "polar") {
    std::printf("%s\n", g10(polar_pi_volume(K, cfg.p, grid, opt)).c_str());
    return 0;
  }
  if (action == "support") {
    if (!cfg.us.empty()) {
      Vec3 u = parse_vec3(cfg.us.front(), "u").normalized();
      std::printf("%s\n", g10(support(K, u)).c_str());
      return 0;
    }
    std::printf("v1,v2,v3,h\n");
    for (const auto& v : grid.nodes)
      std::printf("%s,%s,%s,%s\n", g10(v.x()).c_str(), g10(v.y()).c_str(),
                  g10(v.z()).c_str(), g10(support(K, v)).c_str());
    return 0;
  }
  if (action == "pibody") {
    SampledSupport<3> h = pi_support_grid(K, cfg.p, grid, opt);
    std::printf("v1,v2,v3,h_pi\n");
    for (std::size_t i = 0; i < grid.size(); ++i)
      std::printf("%s,%s,%s,%s\n", g10(grid.nodes[i].x()).c_str(),
                  g10(grid.nodes[i].y()).c_str(), g10(grid.nodes[i].z()).c_str(),
                  g10(h.values[i]).c_str());
    return 0;
  }
  if (action == "gamma") {
    SampledSupport<3> h = gamma_polar_pi(K, cfg.p, grid, opt);
    std::printf("v1,v2,v3,h_gamma\n");
    for (std::size_t i = 0; i < grid.size(); ++i)
      std::printf("%s,%s,%s,%s\n", g10(grid.nodes[i].x()).c_str(),
                  g10(grid.nodes[i].y()).c_str(), g10(grid.nodes[i].z()).c_str(),
                  g10(h.values[i]).c_str());
    return 0;
  }
  if (action == "steiner") {
    if (cfg.us.empty()) usage_error("u: steiner needs a direction");
    Vec3 u = parse_vec3(cfg.us.front(), "u");
    if (u.norm() <= 0.0) usage_error("u: must be nonzero");
    Body<3> S = steiner(K, u.normalized());
    double v0 = volume_exact(K, opt), v1 = volume_exact(S, opt);
    fs::path path = out_dir(cfg) / (fs::path(cfg.body).stem().string() + "_steiner.json");
    save_body(S, path.string());
    std::printf("volume %s -> %s (rel drift %s)\n", g10(v0).c_str(), g10(v1).c_str(),
                g10(std::abs(v1 - v0) / v0).c_str());
    std::printf("wrote %s\n", path.string().c_str());
    return 0;
  }
  usage_error("op: unknown action: " + action);
}

int finish_verify(const RunConfig& cfg, ExperimentReport& rep) {
  fs::path path = out_dir(cfg) / ("verify_" + rep.experiment + ".json");
  write_report(rep, path.string());
  print_records(rep);
  std::printf("wrote %s\n", path.string().c_str());
  return all_pass(rep) ? 0 : 1;
}

int cmd_verify(const std::string& suite, RunConfig cfg) {
  Body<3> K = load_body(cfg.body);
  // the gamma half of the covariance check needs the finer quadrature, and
  // polytope sweeps need the angular resolution for their facet walls
  if (!cfg.level_given) {
    if (suite == "covariance") cfg.level = 3;
    if (suite == "monotone" && std::holds_alternative<Polytope<3>>(K)) cfg.level = 3;
  }
  SphereGrid<3> grid = sphere_grid_3(cfg.level);
  MeasureOptions opt = options_for(cfg);

  if (suite == "covariance") {
    if (cfg.amap.empty()) usage_error("A: covariance needs a map");
    Mat3 A = parse_map(cfg.amap);
    if (std::abs(A.determinant()) <= 0.0) usage_error("A: must be invertible");
    CovarianceReport cov = check_covariance(K, A, cfg.p, grid, opt);
    ExperimentReport rep = report_shell(cfg, "covariance", {});
    rep.records.push_back(make_record("pi_covariance_dev", cov.dev_pi, 1e-2));
    rep.records.push_back(make_record("gamma_covariance_dev", cov.dev_gamma, 1e-2));
    return finish_verify(cfg, rep);
  }

  if (suite == "rolodex") {
    auto us = directions_for(cfg, 1);
    double direct = polar_pi_volume(K, cfg.p, grid, opt);
    double rolo = rolodex_volume(K, us[0], cfg.p, cfg.angles, cfg.scount, 1e-10, opt);
    ExperimentReport rep = report_shell(cfg, "rolodex", us);
    rep.records.push_back(
        make_record("rolodex_rel_gap", std::abs(rolo - direct) / direct, 2e-2));
    return finish_verify(cfg, rep);
  }

  if (suite == "monotone") {
    auto us = directions_for(cfg, 1);
    auto ts = parse_tgrid(cfg.tgrid.empty() ? "0:1:11" : cfg.tgrid);
    ShadowSystem S = make_shadow_system(K, us[0]);
    MonotonicityReport mono = monotonicity_sweep(S, cfg.p, ts, grid, opt);
    ExperimentReport rep = report_shell(cfg, "monotone", us);
    rep.records.push_back(
        make_record("max_increase", mono.max_increase, 1e-6 * volume_exact(K, opt)));
    NamedSweep sweep;
    sweep.name = "monotone";
    for (std::size_t i = 0; i < mono.t.size(); ++i)
      sweep.rows.push_back({mono.t[i], 0.0, mono.vol[i]});
    rep.sweeps.push_back(std::move(sweep));
    return finish_verify(cfg, rep);
  }

  if (suite == "convexity") {
    auto us = directions_for(cfg, 1);
    auto ts = parse_tgrid(cfg.tgrid.empty() ? "-1:1:9" : cfg.tgrid);
    ShadowSystem S = make_shadow_system(K, us[0]);
    ExperimentReport rep = report_shell(cfg, "convexity", us);
    for (int k = 0; k < cfg.angles; ++k) {
      Fiber F = make_fiber(us[0], pi * k / cfg.angles);
      std::string tag = "[" + std::to_string(k) + "]";
      rep.records.push_back(make_record(
          "convexity" + tag, convexity_check(S, F, cfg.p, ts, cfg.scount, 1e-10, opt),
          1e-6));
      double even = 0.0;
      // both sides through the raw combination, like convexity_check
      for (double t : ts)
        if (t > 0.0)
          even = std::max(
              even, std::abs(m_functional(shadow_combination(S, t), F, cfg.p,
                                          cfg.scount, 1e-10, opt) -
                             m_functional(shadow_combination(S, -t), F, cfg.p,
                                          cfg.scount, 1e-10, opt)));
      rep.records.push_back(make_record("evenness" + tag, even, 1e-8));
    }
    return finish_verify(cfg, rep);
  }

  if (suite == "harmonic") {
    auto us = directions_for(cfg, 1);
    ShadowSystem S = make_shadow_system(K, us[0]);
    Fiber F = make_fiber(us[0], 0.3);
    std::mt19937_64 rng(cfg.seed);
    double s_hi = 0.9 * support(K, us[0]);
    std::uniform_real_distribution<double> Us(0.05, s_hi), Ua(0.05, 0.95), Ut(-1.0, 1.0);
    std::vector<HarmonicSample> samples(std::size_t(cfg.scount));
    for (auto& smp : samples) smp = {Us(rng), Us(rng), Ua(rng), Ut(rng), Ut(rng)};
    double viol = harmonic_inequality_check(S, F, cfg.p, samples, 1e-10, opt);
    ExperimentReport rep = report_shell(cfg, "harmonic", us);
    rep.records.push_back(make_record("max_violation", viol, 1e-6));
    return finish_verify(cfg, rep);
  }

  if (suite == "admissible") {
    if (std::get_if<Polytope<3>>(&K))
      usage_error("body: admissible needs a smooth body, got a polytope");
    auto us = directions_for(cfg, 1);
    std::vector<double> ts = cfg.tgrid.empty() ? std::vector<double>{0.9, 0.99, 0.999}
                                               : parse_tgrid(cfg.tgrid);
    ShadowSystem S = make_shadow_system(K, us[0]);
    PerturbationTrace tr = check_admissible(S, ts, grid);
    double worst_step = -1.0;
    for (std::size_t k = 0; k + 1 < tr.sup_dev.size(); ++k)
      worst_step = std::max(worst_step, tr.sup_dev[k + 1] - tr.sup_dev[k]);
    double area = surface_measure(K, opt).total();
    ExperimentReport rep = report_shell(cfg, "admissible", us);
    rep.records.push_back(make_record("sup_dev_final", tr.sup_dev.back(), 1e-2));
    rep.records.push_back(make_record("sup_dev_increase", worst_step, 0.0));
    rep.records.push_back(make_record(
        "phi_integral", std::abs(phi_surface_integral(S, opt)), 1e-4 * area));
    return finish_verify(cfg, rep);
  }

  if (suite == "petty") {
    auto us = directions_for(cfg, 6);
    double tol = 1e-6 * volume_exact(K, opt);
    std::vector<CheckRecord> recs(us.size());
    parallel_for(cfg.jobs, us.size(), [&](std::size_t i) {
      Body<3> mine = load_body(cfg.body);  // worker-private copy, caches included
      recs[i] = petty_steiner_check(mine, us[i], cfg.p, sphere_grid_3(cfg.level),
                                    options_for(cfg), tol);
      recs[i].name += "[" + std::to_string(i) + "]";
    });
    ExperimentReport rep = report_shell(cfg, "petty", us);
    rep.records = std::move(recs);
    return finish_verify(cfg, rep);
  }

  if (suite == "coplanar") {
    auto us = directions_for(cfg, 6);
    std::vector<CheckRecord> recs(us.size());
    parallel_for(cfg.jobs, us.size(), [&](std::size_t i) {
      Body<3> mine = load_body(cfg.body);
      std::string tag = "[" + std::to_string(i) + "]";
      recs[i] = make_record("coplanarity" + tag, midpoint_coplanarity(mine, us[i]), 1e-6);
    });
    ExperimentReport rep = report_shell(cfg, "coplanar", us);
    rep.records = std::move(recs);
    return finish_verify(cfg, rep);
  }

  usage_error("verify: unknown suite: " + suite);
}

int cmd_rigidity(const RunConfig& cfg) {
  Body<3> K = load_body(cfg.body);
  SphereGrid<3> grid = sphere_grid_3(cfg.level);
  auto us = directions_for(cfg, 6);
  ExperimentReport rep =
      rigidity_experiment(K, cfg.p, us, grid, options_for(cfg), cfg.body);
  fs::path path = out_dir(cfg) / "rigidity_report.json";
  write_report(rep, path.string());
  print_records(rep);

  bool fixed = rep.records[0].pass, ell = rep.records[1].pass;
  const char* verdict = fixed && ell ? "fixed-point AND ellipsoid"
                        : fixed      ? "fixed-point only"
                        : ell        ? "ellipsoid only"
                                     : "neither";
  std::printf("verdict: %s\n", verdict);
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

int cmd_iterate(const RunConfig& cfg) {
  Body<3> K = load_body(cfg.body);
  SphereGrid<3> grid = sphere_grid_3(cfg.level);
  auto traj = iterate_operator(K, cfg.p, cfg.steps, grid, options_for(cfg));

  std::string csv = "step,c_star,fixed_residual,ellipsoid_residual\n";
  for (std::size_t j = 1; j < traj.size(); ++j)
    csv += std::to_string(j) + "," + g10(traj[j].fp.c_star) + "," +
           g10(traj[j].fp.residual) + "," + g10(traj[j].ellipsoid_residual) + "\n";
  fs::path path = out_dir(cfg) / "iterate.csv";
  std::ofstream out(path);
  if (!out || !(out << csv))
    throw std::runtime_error("out: cannot write " + path.string());
  out.close();

  if (traj.size() > 1) {
    const auto& last = traj.back();
    std::printf("step %zu: c_star %s fixed_residual %s ellipsoid_residual %s\n",
                traj.size() - 1, g10(last.fp.c_star).c_str(),
                g10(last.fp.residual).c_str(), g10(last.ellipsoid_residual).c_str());
  }
  std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  if (const char* env = std::getenv("LPBMK_OUT")) cfg.out = env;
  if (cfg.out.empty()) cfg.out = ".";

  CLI::App app{"numerical laboratory for L_p projection bodies"};
  app.require_subcommand(1);

  std::string op_action, verify_suite;
  auto add_common = [&cfg](CLI::App* sc) {
    sc->add_option("--body", cfg.body, "body spec JSON file")->required();
    sc->add_option("--p", cfg.p, "exponent, in (1, 10]");
    sc->add_option("--level", cfg.level, "sphere grid level");
    sc->add_option("--base-level", cfg.base_level, "graph base mesh level");
    sc->add_option("--angles", cfg.angles, "fiber count");
    sc->add_option("--scount", cfg.scount, "section nodes / sample count");
    sc->add_option("--tgrid", cfg.tgrid, "t grid as a:b:n");
    sc->add_option("--u", cfg.us, "direction x,y,z (repeatable)");
    sc->add_option("--A", cfg.amap, "linear map, diag:a,b,c or mat:9 numbers");
    sc->add_option("--jobs", cfg.jobs, "worker threads, 0 = auto");
    sc->add_option("--seed", cfg.seed, "RNG seed for sampled checks");
    sc->add_option("--out", cfg.out, "output directory (default $LPBMK_OUT or .)");
    sc->add_option("--config", cfg.config, "JSON file with defaults for unset flags");
    sc->add_option("--steps", cfg.steps, "iteration count");
  };

  CLI::App* op = app.add_subcommand("op", "evaluate one operator");
  op->add_option("action", op_action, "support|pibody|gamma|polar|steiner|volume")
      ->required();
  add_common(op);

  CLI::App* verify = app.add_subcommand("verify", "run a named check suite");
  verify
      ->add_option("suite", verify_suite,
                   "covariance|rolodex|monotone|convexity|harmonic|admissible|petty|coplanar")
      ->required();
  add_common(verify);

  CLI::App* rigidity = app.add_subcommand("rigidity", "fixed-point vs ellipsoid evidence");
  add_common(rigidity);

  CLI::App* iterate = app.add_subcommand("iterate", "iterate the composed operator");
  add_common(iterate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CLI::App* sc = app.get_subcommands().front();
    if (const CLI::Option* lo = sc->get_option_no_throw("--level"); lo && lo->count())
      cfg.level_given = true;
    merge_config(sc, cfg);
    validate(cfg);
    if (sc == op) return cmd_op(op_action, cfg);
    if (sc == verify) return cmd_verify(verify_suite, cfg);
    if (sc == rigidity) return cmd_rigidity(cfg);
    return cmd_iterate(cfg);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
