#include "sbp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbp {

namespace {

double binom(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b *= double(n - k + i) / double(i);
  return b;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= double(i);
  return f;
}

// pure-axis partial d_axis^order P(x0)
double axis_derivative(const PotentialSpec& P, const Vec3& x0, int axis,
                       int order) {
  std::array<int, 3> ord{0, 0, 0};
  ord[axis] = order;
  return P.derivative(x0, ord);
}

// xi^k with the convention 0^0 = 1 (std::pow already guarantees it, spelled
// out here because the moment sums rely on it at panel points on the axes)
double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

std::vector<double> sorted_sweep(std::vector<double> sweep) {
  if (sweep.empty()) throw InvalidModel("sweep study: empty eps list");
  std::sort(sweep.begin(), sweep.end(), std::greater<double>());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  if (!(sweep.back() > 0))
    throw InvalidModel("sweep study: eps values must be positive");
  return sweep;
}

SweepPoint make_point(Reducer& red, const ReductionState& st) {
  const DecompositionReport dr = red.reduced_phi(st);
  const GradientResult gr = red.reduced_grad(st);
  SweepPoint pt;
  pt.eps = st.eps;
  pt.xi = st.xi;
  pt.grad_fd = gr.fd;
  pt.grad_pair = gr.pairing;
  pt.grad_correction = gr.fd_remainder;
  pt.discrepancy = gr.discrepancy;
  pt.phi = dr.phi;
  pt.leading = dr.leading;
  pt.lambda_term = dr.lambda_term;
  pt.omega_term = dr.omega_term;
  pt.psi_term = dr.psi_term;
  pt.identity_defect = dr.identity_defect;
  pt.w_norm_h1 = dr.w_norm_h1;
  pt.residual_dual_norm = st.residual_dual_norm;
  pt.newton_iters = st.newton_iters;
  return pt;
}

}  // namespace

LineFit fit_series(const AsymptoticSeries& s) {
  if (s.eps_values.size() != s.values.size())
    throw NumericFailure("fit_series: size mismatch (" + s.label + ")");
  for (size_t i = 0; i + 1 < s.eps_values.size(); ++i)
    if (!(s.eps_values[i] > s.eps_values[i + 1]))
      throw NumericFailure("fit_series: eps values must be strictly decreasing (" +
                           s.label + ")");
  std::vector<double> e, v;
  for (size_t i = 0; i < s.values.size(); ++i) {
    if (!(s.eps_values[i] > 0))
      throw NumericFailure("fit_series: nonpositive eps (" + s.label + ")");
    if (s.values[i] >= 1e-14) {
      e.push_back(s.eps_values[i]);
      v.push_back(s.values[i]);
    }
  }
  if (e.size() < 4)
    throw NumericFailure(
        "fit_series: fewer than 4 points above rounding level (" + s.label +
        ")");
  return fit_order(e, v);
}

Vec3 curvature_force(const Scenario& sc, const GroundConstants& gc,
                     const Vec3& xi) {
  const auto H = sc.V.hessian(sc.x0);
  Vec3 out{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    out[i] =
        gc.moment_b[1] * (H[i][0] * xi[0] + H[i][1] * xi[1] + H[i][2] * xi[2]);
  return out;
}

Vec3 force_from_v(const Scenario& sc, const GroundConstants& gc,
                  const Vec3& xi) {
  const int n = sc.deg_n;
  if (n < 2 || n > 4)
    throw InvalidModel("force_from_v: axis order must lie in [2, 4]");
  const double fact = factorial(n);
  Vec3 out{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const double dv = axis_derivative(sc.V, sc.x0, i, n);
    if (dv == 0.0) continue;
    double s = 0.0;
    for (int alpha = 1; alpha <= n; alpha += 2)
      s += binom(n, alpha) * ipow(xi[i], n - alpha) * gc.moment_b[alpha];
    out[i] = dv * s / fact;
  }
  return out;
}

Vec3 force_from_k(const Scenario& sc, const GroundConstants& gc,
                  const Vec3& xi) {
  const int m = sc.deg_m;
  if (m < 1 || m > 4)
    throw InvalidModel("force_from_k: axis order must lie in [1, 4]");
  const double fact = factorial(m);
  std::array<double, 3> dk{0, 0, 0};
  double weighted_a = 0.0;  // sum_j d_j^m K(x0) * A_j(xi)
  for (int j = 0; j < 3; ++j) {
    dk[j] = axis_derivative(sc.K, sc.x0, j, m);
    if (dk[j] == 0.0) continue;
    double aj = 0.0;
    for (int alpha = 0; alpha <= m; alpha += 2)
      aj += binom(m, alpha) * ipow(xi[j], m - alpha) * gc.moment_a[alpha];
    weighted_a += dk[j] * aj;
  }
  Vec3 out{0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    if (dk[i] == 0.0) continue;
    double bi = 0.0;
    for (int beta = 1; beta <= m; beta += 2)
      bi += binom(m, beta) * ipow(xi[i], m - beta) * gc.moment_b[beta];
    out[i] = dk[i] * bi * weighted_a / (fact * fact);
  }
  return out;
}

double pair_moment(const GroundConstants& gc, int alpha, int beta, int i,
                   int j, int l) {
  if (alpha < 0 || alpha > 4 || beta < 0 || beta > 4)
    throw InvalidModel("pair_moment: moment order must lie in [0, 4]");
  if (i < 0 || i > 2 || j < 0 || j > 2 || l < 0 || l > 2)
    throw InvalidModel("pair_moment: axis index must lie in [0, 2]");
  if (l != i || alpha % 2 != 0 || beta % 2 == 0) return 0.0;
  return gc.moment_a[alpha] * gc.moment_b[beta];
}

Vec3 predicted_grad(const Scenario& sc, const GroundConstants& gc,
                    const Vec3& xi, double eps) {
  Vec3 out{0, 0, 0};
  if (sc.regime == "flat") return out;
  if (sc.regime == "nondegenerate" || sc.regime == "ring")
    return -eps * eps * curvature_force(sc, gc, xi);
  if (sc.regime == "degenerate_v")
    return -std::pow(eps, sc.deg_n) * force_from_v(sc, gc, xi);
  if (sc.regime == "degenerate_k")
    return -std::pow(eps, 2 * sc.deg_m + 3) * force_from_k(sc, gc, xi);
  if (sc.regime == "mixed") {
    const Vec3 fv = force_from_v(sc, gc, xi);
    const Vec3 fk = force_from_k(sc, gc, xi);
    const double cn = std::pow(eps, sc.deg_n);
    const double cm = std::pow(eps, 2 * sc.deg_m + 3);
    for (int i = 0; i < 3; ++i) out[i] = -(cn * fv[i] + cm * fk[i]);
    return out;
  }
  throw InvalidModel("predicted_grad: unknown regime '" + sc.regime + "'");
}

double leading_order(const Scenario& sc) {
  if (sc.regime == "flat") return 0.0;
  if (sc.regime == "nondegenerate" || sc.regime == "ring") return 2.0;
  if (sc.regime == "degenerate_v") return double(sc.deg_n);
  if (sc.regime == "degenerate_k") return double(2 * sc.deg_m + 3);
  if (sc.regime == "mixed")
    return double(std::min(sc.deg_n, 2 * sc.deg_m + 3));
  throw InvalidModel("leading_order: unknown regime '" + sc.regime + "'");
}

Vec3 leading_force(const Scenario& sc, const GroundConstants& gc,
                   const Vec3& xi) {
  if (sc.regime == "flat") return {0, 0, 0};
  if (sc.regime == "nondegenerate" || sc.regime == "ring")
    return curvature_force(sc, gc, xi);
  if (sc.regime == "degenerate_v") return force_from_v(sc, gc, xi);
  if (sc.regime == "degenerate_k") return force_from_k(sc, gc, xi);
  if (sc.regime == "mixed")
    return sc.deg_n <= 2 * sc.deg_m + 3 ? force_from_v(sc, gc, xi)
                                        : force_from_k(sc, gc, xi);
  throw InvalidModel("leading_force: unknown regime '" + sc.regime + "'");
}

std::array<Vec3, 3> predicted_grad_jacobian(const Scenario& sc,
                                            const GroundConstants& gc,
                                            const Vec3& xi, double eps,
                                            double delta) {
  std::array<Vec3, 3> jac{};  // jac[i][k] = d predicted_i / d xi_k
  for (int k = 0; k < 3; ++k) {
    Vec3 xp = xi, xm = xi;
    xp[k] += delta;
    xm[k] -= delta;
    const Vec3 gp = predicted_grad(sc, gc, xp, eps);
    const Vec3 gm = predicted_grad(sc, gc, xm, eps);
    for (int i = 0; i < 3; ++i) jac[i][k] = (gp[i] - gm[i]) / (2.0 * delta);
  }
  return jac;
}

PanelStudy run_panel(Reducer& red, const Vec3& xi,
                     const std::vector<double>& sweep) {
  const Scenario& sc = red.scenario();
  const GroundConstants& gc = red.constants();
  const std::vector<double> eps_list = sorted_sweep(sweep);

  PanelStudy ps;
  ps.xi = xi;
  ps.gamma = leading_order(sc);
  ps.model_force = leading_force(sc, gc, xi);
  ps.remainder.label = sc.name + " gradient remainder at fixed offset";

  ReductionState warm;
  bool have_warm = false;
  for (double eps : eps_list) {
    // the grid lives at the blow-up image of x0 plus the fixed offset
    const Vec3 xi_abs = (1.0 / eps) * sc.x0 + xi;
    const ReductionState st = have_warm
                                  ? red.solve_auxiliary(eps, xi_abs, &warm)
                                  : red.solve_auxiliary(eps, xi_abs);
    warm = st;
    have_warm = true;
    ps.points.push_back(make_point(red, st));
  }

  for (const SweepPoint& pt : ps.points) {
    const Vec3 model = predicted_grad(sc, gc, xi, pt.eps);
    const double rem = norm(pt.grad_fd - model);
    if (rem > 10.0 * pt.discrepancy) {
      ps.remainder.eps_values.push_back(pt.eps);
      ps.remainder.values.push_back(rem);
    }
  }
  if (ps.remainder.eps_values.size() >= 4) {
    try {
      ps.remainder_fit = fit_series(ps.remainder);
      ps.fit_ok = true;
    } catch (const NumericFailure&) {
      ps.fit_ok = false;
    }
  }

  // leading coefficient at the cleanest (smallest usable) eps
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ps.coeff_ratio = {nan, nan, nan};
  double model_max = 0.0;
  for (int i = 0; i < 3; ++i)
    model_max = std::max(model_max, std::abs(ps.model_force[i]));
  if (model_max > 0.0) {
    for (auto it = ps.points.rbegin(); it != ps.points.rend(); ++it) {
      if (norm(it->grad_fd) <= 10.0 * std::max(it->discrepancy, 1e-12))
        continue;
      const double scale = std::pow(it->eps, ps.gamma);
      // peel off any higher-order channel the full model carries (mixed)
      const Vec3 full = predicted_grad(sc, gc, xi, it->eps);
      const Vec3 other = full + scale * ps.model_force;
      for (int i = 0; i < 3; ++i) {
        if (std::abs(ps.model_force[i]) < 0.1 * model_max) continue;
        ps.coeff_ratio[i] =
            -(it->grad_fd[i] - other[i]) / scale / ps.model_force[i];
      }
      ps.coeff_eps = it->eps;
      break;
    }
  }
  return ps;
}

FixedPointStudy run_fixed_point(Reducer& red, const Vec3& xstar,
                                const std::vector<double>& sweep) {
  const Scenario& sc = red.scenario();
  const std::vector<double> eps_list = sorted_sweep(sweep);

  FixedPointStudy fs;
  fs.xstar = xstar;
  fs.value_remainder.label = sc.name + " energy beyond leading, fixed point";
  fs.grad_remainder.label = sc.name + " gradient beyond leading, fixed point";

  ReductionState warm;
  bool have_warm = false;
  for (double eps : eps_list) {
    const Vec3 xi = (1.0 / eps) * xstar;
    const ReductionState st = have_warm
                                  ? red.solve_auxiliary(eps, xi, &warm)
                                  : red.solve_auxiliary(eps, xi);
    warm = st;
    have_warm = true;
    const SweepPoint pt = make_point(red, st);
    fs.points.push_back(pt);
    fs.value_remainder.eps_values.push_back(eps);
    fs.value_remainder.values.push_back(
        std::abs(pt.lambda_term + pt.omega_term + pt.psi_term));
    fs.grad_remainder.eps_values.push_back(eps);
    fs.grad_remainder.values.push_back(norm(pt.grad_correction));
  }
  if (fs.points.size() >= 4) {
    try {
      fs.value_fit = fit_series(fs.value_remainder);
      fs.grad_fit = fit_series(fs.grad_remainder);
      fs.fits_ok = true;
    } catch (const NumericFailure&) {
      fs.fits_ok = false;  // flat scenarios: remainders at rounding level
    }
  }
  return fs;
}

std::vector<Vec3> default_panel(const Scenario& sc) {
  if (sc.regime == "ring") return {{0.5, 0, 0}, {0, 0, 0.7}, {-0.4, 0, 0.3}};
  if (sc.regime == "degenerate_k" || sc.regime == "mixed")
    return {{1.0, 0, 0}, {0.7, 0.9, 0}};
  if (sc.regime == "flat") return {{0.7, 0, 0}};
  return {{1.0, 0, 0}, {0, 1.2, 0}, {0.8, 0.8, 0.5}, {-1.5, 0.5, 0}};
}

ExpansionReport expansion_study(Reducer& red, std::vector<Vec3> panel_xis,
                                const std::vector<Vec3>& fixed_xstars,
                                std::vector<double> sweep) {
  if (panel_xis.empty()) panel_xis = default_panel(red.scenario());
  if (sweep.empty()) sweep = red.scenario().eps_sweep;
  ExpansionReport rep;
  for (const Vec3& xi : panel_xis)
    rep.panels.push_back(run_panel(red, xi, sweep));
  for (const Vec3& xs : fixed_xstars)
    rep.fixed_points.push_back(run_fixed_point(red, xs, sweep));
  return rep;
}

}  // namespace sbp
