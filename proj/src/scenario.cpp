#include "sbp/scenario.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "sbp/util.hpp"

namespace sbp {
namespace {

using nlohmann::json;

json potential_to_json(const PotentialSpec& p) {
  json j;
  j["c0"] = p.c0;
  j["bumps"] = json::array();
  for (const auto& b : p.bumps) {
    json jb;
    jb["a"] = b.a;
    jb["center"] = {b.center[0], b.center[1], b.center[2]};
    jb["sigma"] = b.sigma;
    jb["q"] = {b.q[0], b.q[1], b.q[2]};
    j["bumps"].push_back(jb);
  }
  return j;
}

PotentialSpec potential_from_json(const json& j) {
  PotentialSpec p;
  p.c0 = j.value("c0", 0.0);
  if (j.contains("bumps"))
    for (const auto& jb : j.at("bumps")) {
      BumpTerm b;
      b.a = jb.at("a").get<double>();
      const auto c = jb.value("center", std::vector<double>{0, 0, 0});
      b.center = {c.at(0), c.at(1), c.at(2)};
      b.sigma = jb.value("sigma", 1.0);
      const auto q = jb.value("q", std::vector<int>{0, 0, 0});
      b.q = {q.at(0), q.at(1), q.at(2)};
      p.bumps.push_back(b);
    }
  return p;
}

// enumerate multi-indices of total order k and check the pure/mixed partials
double max_partial_of_order(const PotentialSpec& pot, const Vec3& x, int k) {
  double worst = 0;
  for (int m1 = 0; m1 <= k; ++m1)
    for (int m2 = 0; m2 + m1 <= k; ++m2) {
      const int m3 = k - m1 - m2;
      worst = std::max(worst, std::fabs(pot.derivative(x, {m1, m2, m3})));
    }
  return worst;
}

double max_axis_partial(const PotentialSpec& pot, const Vec3& x, int k) {
  double worst = 0;
  for (int d = 0; d < 3; ++d) {
    std::array<int, 3> ord{0, 0, 0};
    ord[d] = k;
    worst = std::max(worst, std::fabs(pot.derivative(x, ord)));
  }
  return worst;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario: " + path);
  json j;
  in >> j;
  Scenario sc;
  sc.name = j.value("name", "unnamed");
  sc.p = j.value("p", 3.0);
  sc.regime = j.value("regime", "nondegenerate");
  if (j.contains("x0")) {
    const auto& x = j.at("x0");
    sc.x0 = {x.at(0).get<double>(), x.at(1).get<double>(), x.at(2).get<double>()};
  }
  sc.deg_n = j.value("deg_n", 2);
  sc.deg_m = j.value("deg_m", 2);
  if (j.contains("V")) sc.V = potential_from_json(j.at("V"));
  if (j.contains("K")) sc.K = potential_from_json(j.at("K"));
  if (j.contains("grid")) {
    sc.grid_n = j.at("grid").value("n", sc.grid_n);
    sc.grid_L = j.at("grid").value("L", sc.grid_L);
  }
  if (j.contains("eps")) sc.eps_sweep = j.at("eps").get<std::vector<double>>();
  sc.seed = j.value("seed", static_cast<uint64_t>(20260815));
  if (j.contains("tolerances")) {
    sc.newton_tol = j.at("tolerances").value("newton", sc.newton_tol);
    sc.constraint_tol = j.at("tolerances").value("constraint", sc.constraint_tol);
  }
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  json j;
  j["name"] = sc.name;
  j["p"] = sc.p;
  j["regime"] = sc.regime;
  j["x0"] = {sc.x0[0], sc.x0[1], sc.x0[2]};
  j["deg_n"] = sc.deg_n;
  j["deg_m"] = sc.deg_m;
  j["V"] = potential_to_json(sc.V);
  j["K"] = potential_to_json(sc.K);
  j["grid"] = {{"n", sc.grid_n}, {"L", sc.grid_L}};
  j["eps"] = sc.eps_sweep;
  j["seed"] = sc.seed;
  j["tolerances"] = {{"newton", sc.newton_tol}, {"constraint", sc.constraint_tol}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

void validate_scenario(const Scenario& sc) {
  std::ostringstream err;
  auto fail = [&](const std::string& m) { err << m << "\n"; };

  if (!(sc.p > 1.0 && sc.p < 5.0)) fail("p must lie in (1,5)");
  if (sc.grid_n < 8 || sc.grid_n % 2) fail("grid n must be even and >= 8");
  if (!(sc.grid_L > 0)) fail("grid L must be positive");
  if (sc.eps_sweep.empty()) fail("eps sweep must not be empty");
  for (double e : sc.eps_sweep)
    if (!(e > 0)) fail("eps sweep entries must be positive");
  for (const auto* pot : {&sc.V, &sc.K})
    for (const auto& b : pot->bumps) {
      if (!(b.sigma > 0)) fail("bump sigma must be positive");
      if (b.q[0] < 0 || b.q[1] < 0 || b.q[2] < 0) fail("bump powers must be >= 0");
    }

  // sample V and K on a coarse lattice: V must stay positive, K nonnegative
  double vmin = sc.V.value(sc.x0), kmin = 0;
  for (int i = -8; i <= 8; ++i)
    for (int j = -8; j <= 8; ++j)
      for (int k = -8; k <= 8; ++k) {
        const Vec3 x{1.5 * i, 1.5 * j, 1.5 * k};
        vmin = std::min(vmin, sc.V.value(x));
        kmin = std::min(kmin, sc.K.value(x));
      }
  if (!(vmin > 0)) fail("V must be strictly positive (sampled min <= 0)");
  if (kmin < -1e-12) fail("K must be nonnegative (sampled min < 0)");
  if (!(sc.V.value(sc.x0) > 0)) fail("V(x0) must be positive");

  const double vscale = std::max(1.0, std::fabs(sc.V.value(sc.x0)));
  const Vec3 gV = sc.V.gradient(sc.x0);

  if (sc.regime == "flat") {
    if (!sc.V.is_constant()) fail("flat regime requires constant V");
    if (!sc.K.is_zero()) fail("flat regime requires K = 0");
  } else if (sc.regime == "nondegenerate") {
    if (norm(gV) > 1e-12 * vscale) fail("nondegenerate regime: grad V(x0) must vanish");
    const auto H = sc.V.hessian(sc.x0);
    Eigen::Matrix3d He;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) He(a, b) = H[a][b];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(He);
    if (es.eigenvalues().minCoeff() <= 0)
      fail("nondegenerate regime: Hess V(x0) must be positive definite");
  } else if (sc.regime == "degenerate_v" || sc.regime == "mixed") {
    if (sc.deg_n < 3) fail("degenerate V regime needs deg_n >= 3");
    for (int k = 1; k < sc.deg_n; ++k)
      if (max_partial_of_order(sc.V, sc.x0, k) > 1e-12 * vscale)
        fail("degenerate V regime: partials of order " + std::to_string(k) +
             " must vanish at x0");
    if (max_axis_partial(sc.V, sc.x0, sc.deg_n) < 1e-10)
      fail("degenerate V regime: some pure axis derivative of order deg_n must be nonzero");
    if (sc.regime == "degenerate_v" && 2 * sc.deg_m + 3 <= sc.deg_n && !sc.K.is_zero())
      fail("degenerate V regime: requires deg_n < 2 deg_m + 3");
  } else if (sc.regime == "ring") {
    if (norm(gV) > 1e-12 * vscale) fail("ring regime: grad V(x0) must vanish");
    const auto H = sc.V.hessian(sc.x0);
    Eigen::Matrix3d He;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) He(a, b) = H[a][b];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(He);
    const auto ev = es.eigenvalues();
    // one flat (azimuthal) direction, two strictly convex transverse ones
    if (!(ev(0) > -1e-8 * vscale && std::fabs(ev(0)) < 1e-6 * vscale))
      fail("ring regime: smallest Hessian eigenvalue at x0 should be ~0 (azimuthal)");
    if (!(ev(1) > 1e-6)) fail("ring regime: transverse Hessian must be positive");
  }
  if (sc.regime == "degenerate_k" || sc.regime == "mixed") {
    if (sc.deg_m < 1) fail("degenerate K regime needs deg_m >= 1");
    if (sc.regime == "degenerate_k" && !sc.V.is_constant())
      fail("degenerate K regime requires constant V");
    if (sc.K.is_zero()) fail("degenerate K regime requires a nonzero K");
    for (int k = 0; k < sc.deg_m; ++k)
      if (max_partial_of_order(sc.K, sc.x0, k) > 1e-12)
        fail("degenerate K regime: partials of order " + std::to_string(k) +
             " of K must vanish at x0");
    if (max_axis_partial(sc.K, sc.x0, sc.deg_m) < 1e-10)
      fail("degenerate K regime: some pure axis derivative of order deg_m must be nonzero");
  }

  const std::string rs = err.str();
  if (!rs.empty()) throw InvalidModel("scenario '" + sc.name + "' invalid:\n" + rs);
}

Scenario builtin_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "flat") {
    sc.regime = "flat";
    sc.V.c0 = 1.0;
    sc.grid_n = 64;
    sc.grid_L = 14.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095,
                    0.1, 0.0707106781186548, 0.05};
  } else if (name == "kunit") {
    // same well as "bump" but with a uniform coupling K = 1, so the quartic
    // interaction is on at full strength everywhere
    sc.regime = "nondegenerate";
    sc.V.c0 = 1.5;
    sc.V.bumps.push_back({-0.5, {0, 0, 0}, 2.0, {0, 0, 0}});
    sc.K.c0 = 1.0;
    sc.grid_n = 64;
    sc.grid_L = 14.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095,
                    0.1, 0.0707106781186548, 0.05};
  } else if (name == "bump") {
    // V = 1.5 - 0.5 exp(-|x|^2/4): min V(0) = 1, Hess V(0) = 0.25 I
    sc.regime = "nondegenerate";
    sc.V.c0 = 1.5;
    sc.V.bumps.push_back({-0.5, {0, 0, 0}, 2.0, {0, 0, 0}});
    sc.grid_n = 64;
    sc.grid_L = 14.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095,
                    0.1, 0.0707106781186548, 0.05};
  } else if (name == "quartic") {
    // V = 1 + 0.05 sum_i x_i^4 exp(-|x|^2/4): flat to third order,
    // d_i^4 V(0) = 1.2 on each axis, mixed fourth partials vanish
    sc.regime = "degenerate_v";
    sc.deg_n = 4;
    for (int d = 0; d < 3; ++d) {
      BumpTerm b{0.05, {0, 0, 0}, 2.0, {0, 0, 0}};
      b.q[d] = 4;
      sc.V.bumps.push_back(b);
    }
    sc.V.c0 = 1.0;
    sc.grid_n = 48;
    sc.grid_L = 12.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095,
                    0.1, 0.0707106781186548, 0.05};
  } else if (name == "kbump") {
    // V = 1; K = sum_i b_i x_i^2 exp(-|x|^2/4) with d_i^2 K(0) = (1, .1, .1)
    sc.regime = "degenerate_k";
    sc.deg_m = 2;
    sc.V.c0 = 1.0;
    const double amp[3] = {0.5, 0.05, 0.05};
    for (int d = 0; d < 3; ++d) {
      BumpTerm b{amp[d], {0, 0, 0}, 2.0, {0, 0, 0}};
      b.q[d] = 2;
      sc.K.bumps.push_back(b);
    }
    sc.grid_n = 48;
    sc.grid_L = 12.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095, 0.1};
  } else if (name == "mixed") {
    sc.regime = "mixed";
    sc.deg_n = 4;
    sc.deg_m = 2;
    sc.V.c0 = 1.0;
    for (int d = 0; d < 3; ++d) {
      BumpTerm b{0.05, {0, 0, 0}, 2.0, {0, 0, 0}};
      b.q[d] = 4;
      sc.V.bumps.push_back(b);
    }
    const double amp[3] = {0.5, 0.05, 0.05};
    for (int d = 0; d < 3; ++d) {
      BumpTerm b{amp[d], {0, 0, 0}, 2.0, {0, 0, 0}};
      b.q[d] = 2;
      sc.K.bumps.push_back(b);
    }
    sc.grid_n = 48;
    sc.grid_L = 12.0;
    sc.eps_sweep = {0.4, 0.2828427124746190, 0.2, 0.1414213562373095, 0.1};
  } else if (name == "ring") {
    // V = 1.5 - (0.5 e / s^2) (x1^2 + x2^2) exp(-|x|^2/s^2), s = 1.5:
    // exact minimum V = 1 on the circle rho = s in the x3 = 0 plane
    sc.regime = "ring";
    const double s = 1.5;
    const double a = -0.5 * std::exp(1.0) / (s * s);
    sc.V.c0 = 1.5;
    sc.V.bumps.push_back({a, {0, 0, 0}, s, {2, 0, 0}});
    sc.V.bumps.push_back({a, {0, 0, 0}, s, {0, 2, 0}});
    sc.x0 = {s, 0, 0};
    sc.grid_n = 32;
    sc.grid_L = 12.0;
    sc.eps_sweep = {0.25, 0.1767766952966369, 0.125};
  } else {
    throw InvalidModel("unknown builtin scenario: " + name);
  }
  return sc;
}

std::vector<std::string> builtin_scenario_names() {
  return {"flat", "bump", "kunit", "quartic", "kbump", "mixed", "ring"};
}

}  // namespace sbp
