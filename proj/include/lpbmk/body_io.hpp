#pragma once

#include "lpbmk/bodies.hpp"

#include <string>

namespace lpbmk {

// Body specification files:
//   {"kind":"polytope","vertices":[[x,y,z],...]}
//   {"kind":"ellipsoid","matrix":[[...],[...],[...]]}
//   {"kind":"lq_ball","q":4.0,"scale":1.0}
// Unknown fields are rejected by name. n = 3 only.
Body<3> parse_body(const std::string& json_text);
Body<3> load_body(const std::string& path);

std::string body_to_json(const Body<3>& K);
void save_body(const Body<3>& K, const std::string& path);

// lq ball as a graph body along e3 with closed-form graphs
GraphBody<3> lq_ball_body(double q, double scale, int base_samples = 256);

}  // namespace lpbmk
