#pragma once

#include "lpbmk/lp_ops.hpp"
#include "lpbmk/rolodex.hpp"
#include "lpbmk/shadow.hpp"

#include <string>

namespace lpbmk {

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;  // always value <= tol
};

CheckRecord make_record(std::string name, double value, double tol);

struct NamedSweep {
  std::string name;
  std::vector<ShadowSweepRow> rows;
};

struct NamedProfile {
  std::string name;
  SectionProfile profile;
};

// One experiment run: parameter echo, pass/fail records, CSV payloads.
// artifacts is filled by write_report with the sibling files it created.
struct ExperimentReport {
  std::string experiment;
  std::string body;  // spec the body was loaded from, verbatim
  double p = 2.0;
  std::vector<Vec3> directions;
  int sphere_level = 3;
  int base_level = 5;
  std::vector<CheckRecord> records;
  std::vector<NamedSweep> sweeps;
  std::vector<NamedProfile> profiles;
  std::vector<std::string> artifacts;
};

// vol(Pi_p* K) - vol(Pi_p* S_u K), recorded as a deficit so that pass means
// the Steiner inequality holds within tol.
CheckRecord petty_steiner_check(const Body<3>& K, const Vec3& u, double p,
                                const SphereGrid<3>& grid,
                                const MeasureOptions& opt = {}, double tol = 1e-6);

// Max deviation of the chord midpoint surface (f+g)/2 from its best affine
// fit over the base, relative to diam(K).
double midpoint_coplanarity(const Body<3>& K, const Vec3& u, int base_level = 4);

struct EllipsoidFit {
  Mat3 A = Mat3::Identity();  // SPD; the fitted body is A * (unit ball)
  double residual = 0.0;      // sup |h_K(v) - |Av|| / h_K(v) over the grid
};

// Least squares fit of h^2 by a quadratic form over the grid.  Requires an
// origin-symmetric body; throws domain_error when the form is not SPD.
EllipsoidFit ellipsoid_fit(const Body<3>& K, const SphereGrid<3>& grid,
                           double sym_tol = 1e-8);

// The proof-chain experiment: fixed point residual, ellipsoid fit, and per
// direction the first variation, the constancy of vol(Pi_p* K_t), and the
// chord midpoint coplanarity.  body_echo lands in the report verbatim.
ExperimentReport rigidity_experiment(const Body<3>& K, double p,
                                     const std::vector<Vec3>& us,
                                     const SphereGrid<3>& grid,
                                     const MeasureOptions& opt = {},
                                     const std::string& body_echo = "");

struct IterateStep {
  SampledSupport<3> h;  // support of this step's body on the grid
  double ellipsoid_residual = 0.0;
  FixedPoint fp;
  double convexity_gap = 0.0;  // worst relative support excess before repair
  bool repaired = false;       // gap exceeded 1e-6, samples were projected
};

// K_{j+1} = unit-volume rescaling of the largest body whose support stays
// below h_{Gamma_p Pi_p* K_j} at the grid directions.  steps transitions,
// steps+1 trajectory entries.
std::vector<IterateStep> iterate_operator(const Body<3>& K0, double p, int steps,
                                          const SphereGrid<3>& grid,
                                          const MeasureOptions& opt = {});

// 6 axis directions plus 8 normalized diagonals
std::vector<Vec3> default_directions();

// CSV payloads; columns are part of the format contract
std::string sweep_csv(const std::vector<ShadowSweepRow>& rows);  // t,vol_Kt,vol_polar_pi
std::vector<ShadowSweepRow> parse_sweep_csv(const std::string& text);
std::string profile_csv(const SectionProfile& prof);  // s,length
SectionProfile parse_profile_csv(const std::string& text);

// JSON report at path, one sibling CSV per sweep/profile; artifacts in the
// returned copy name the files written.  Byte-deterministic for identical
// inputs: the payload carries no timestamps or machine state.
ExperimentReport write_report(const ExperimentReport& r, const std::string& path);
ExperimentReport read_report(const std::string& path);

}  // namespace lpbmk
