// Scenario bundles: exponent, potential pair (V, K), concentration point,
// degeneracy orders, grid defaults and the epsilon sweep, loaded from JSON
// and validated against the structural assumptions of the declared regime.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbp/potential.hpp"

namespace sbp {

// regimes: flat | nondegenerate | degenerate_v | degenerate_k | mixed | ring
struct Scenario {
  std::string name = "unnamed";
  double p = 3.0;
  PotentialSpec V, K;
  std::string regime = "nondegenerate";
  Vec3 x0{0, 0, 0};   // concentration point (critical point of the reduced model)
  int deg_n = 2;      // leading pure-axis derivative order of V at x0
  int deg_m = 2;      // leading pure-axis derivative order of K at x0
  int grid_n = 48;
  double grid_L = 12.0;
  std::vector<double> eps_sweep;
  uint64_t seed = 20260815;
  // solver tolerances carried with the scenario so runs are reproducible
  double newton_tol = 1e-9;      // dual norm of the projected residual
  double constraint_tol = 1e-10; // orthogonality defect against the tangents
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);

// Throws InvalidModel with a newline-separated list of violations.
void validate_scenario(const Scenario& sc);

// Bundled scenarios: flat, bump, kunit, quartic, kbump, mixed, ring.
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

}  // namespace sbp
