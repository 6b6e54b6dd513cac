#include "sbp/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sbp/energy.hpp"

namespace sbp {

namespace {

double frob(const std::array<Vec3, 3>& m) {
  double s = 0;
  for (const auto& row : m)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

double det3(const std::array<Vec3, 3>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Gaussian elimination with partial pivoting on a 3x3 system.
Vec3 solve3(std::array<Vec3, 3> a, Vec3 b) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) < 1e-300) throw NumericFailure("solve3: singular");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec3 x{};
  for (int c = 2; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < 3; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return x;
}

// Jacobian of the model gradient built from the *local* Hessian of V, so the
// stiff/soft axes are right even far from x0 (a ring point at another angle
// sees its own radial direction).  Degenerate regimes add their force-field
// channels, which are expansions around x0 and only used inside its basin.
std::array<Vec3, 3> local_jacobian(const Scenario& sc,
                                   const GroundConstants& gc, const Vec3& xi,
                                   double eps) {
  std::array<Vec3, 3> jac{};
  const Vec3 y = eps * xi;
  const auto H = sc.V.hessian(y);
  const double cur = 0.5 * eps * eps * gc.l2sq;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) jac[i][k] = cur * H[i][k];
  if (sc.regime == "degenerate_v" || sc.regime == "degenerate_k" ||
      sc.regime == "mixed") {
    const Vec3 off = xi - (1.0 / eps) * sc.x0;
    const auto jch = predicted_grad_jacobian(sc, gc, off, eps);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) jac[i][k] += jch[i][k];
  }
  return jac;
}

std::vector<double> sorted_sweep(std::vector<double> sweep) {
  if (sweep.empty()) throw InvalidModel("concentration: empty eps sweep");
  std::sort(sweep.begin(), sweep.end(), std::greater<double>());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  for (double e : sweep)
    if (!(e > 0)) throw InvalidModel("concentration: eps must be positive");
  return sweep;
}

// Record assembly that reports instead of throwing; full_solution adds the
// hard natural-constraint gate on top.
ConcentrationRecord assemble_record(Reducer& red, const CriticalPoint& cp,
                                    const ConcentrationOptions& opt) {
  const Scenario& sc = red.scenario();
  ConcentrationRecord rec;
  rec.eps = cp.state.eps > 0 ? cp.state.eps : 0;
  rec.xi_star = cp.xi;
  rec.reduced_grad_norm = cp.grad_norm;
  rec.local_index = cp.local_index;
  rec.newton_iters = cp.iters;
  if (rec.eps > 0) {
    const Vec3 y = rec.eps * cp.xi;
    rec.distance_to_expected = norm(y - sc.x0);
    rec.grad_v_at_point = norm(sc.V.gradient(y));
  }
  if (!cp.converged) return rec;

  const ReductionState& st = cp.state;
  DecompositionReport rep = red.reduced_phi(st);
  rec.phi_value = rep.phi;
  rec.w_norm_h1 = rep.w_norm_h1;

  EnergyModel em(sc, st.eps, st.grid, red.spectral());
  Field u = st.z;
  field_axpy(1.0, st.w, u);
  rec.full_residual_dual_norm = em.resid_dual_norm(u);
  rec.converged = rec.full_residual_dual_norm <= opt.residual_tol;
  return rec;
}

}  // namespace

CriticalPoint find_critical_xi(Reducer& red, double eps, const Vec3& guess,
                               const ConcentrationOptions& opt,
                               const ReductionState* warm) {
  const Scenario& sc = red.scenario();
  const GroundConstants& gc = red.constants();

  CriticalPoint cp;
  cp.xi = guess;
  Vec3 next = guess;
  ReductionState prev;
  bool have_prev = false;
  try {
    for (int it = 0; it < opt.max_iter; ++it) {
      const ReductionState* chain = have_prev ? &prev : warm;
      prev = chain ? red.solve_auxiliary(eps, next, chain)
                   : red.solve_auxiliary(eps, next);
      have_prev = true;
      const GradientResult gr = red.reduced_grad(prev);
      cp.xi = next;  // xi, state and gradient always describe the same point
      cp.state = prev;
      cp.grad = gr.fd;
      cp.grad_norm = norm(gr.fd);
      cp.iters = it + 1;

      const auto jac = local_jacobian(sc, gc, cp.xi, eps);
      if (cp.grad_norm < opt.gtol) {
        const double d = det3(jac);
        cp.local_index = (d > 0) - (d < 0);
        cp.converged = true;
        return cp;
      }

      // Levenberg shift keeps ring scenarios (flat circle direction) and the
      // flat regime (zero model) stepping; scale ties it to the model size.
      const double mu =
          std::max((opt.damping > 0 ? opt.damping : 1e-2) * frob(jac), 1e-12);
      std::array<Vec3, 3> a = jac;
      for (int i = 0; i < 3; ++i) a[i][i] += mu;
      Vec3 step;
      try {
        step = solve3(a, -1.0 * cp.grad);
      } catch (const NumericFailure&) {
        step = (-1.0 / mu) * cp.grad;
      }
      const double sn = norm(step);
      const double cap = 0.5 * opt.radius;
      if (sn > cap) step = (cap / sn) * step;
      next = cp.xi + step;
      if (norm(next - guess) > opt.radius) {
        cp.left_ball = true;
        cp.message = "search left the trust ball around the guess";
        return cp;
      }
    }
    cp.message = "no convergence within max_iter";
  } catch (const std::exception& e) {
    cp.message = e.what();
  }
  return cp;
}

ConcentrationRecord full_solution(Reducer& red, const CriticalPoint& cp,
                                  const ConcentrationOptions& opt) {
  ConcentrationRecord rec = assemble_record(red, cp, opt);
  if (cp.converged && !rec.converged)
    throw NumericFailure(
        "natural-constraint violation: reduced gradient " +
        format_g17(cp.grad_norm) + " passed but full residual " +
        format_g17(rec.full_residual_dual_norm) + " exceeds " +
        format_g17(opt.residual_tol));
  return rec;
}

ConcentrationStudy concentration_study(Reducer& red, std::vector<double> sweep,
                                       const Vec3* start,
                                       const ConcentrationOptions& opt) {
  const Scenario& sc = red.scenario();
  if (sweep.empty()) sweep = sc.eps_sweep;
  sweep = sorted_sweep(sweep);
  const Vec3 base = start ? *start : sc.x0;

  ConcentrationStudy cs;
  cs.start = base;
  AsymptoticSeries dist, wn;
  dist.label = sc.name + " blow-down distance to the hypothesized point";
  wn.label = sc.name + " corrector norm at the critical point";

  cs.all_converged = true;
  cs.all_certified = true;
  ReductionState last;
  bool have_last = false;
  for (double eps : sweep) {
    const Vec3 guess = (1.0 / eps) * base;
    const CriticalPoint cp =
        find_critical_xi(red, eps, guess, opt, have_last ? &last : nullptr);
    if (cp.converged) {
      last = cp.state;
      have_last = true;
      cs.final_state = cp.state;
      cs.final_xi = cp.xi;
      cs.has_final_state = true;
    }
    ConcentrationRecord rec = assemble_record(red, cp, opt);
    // distance against the *hypothesized* point: a study started away from a
    // true concentration point must see this stagnate or diverge
    if (rec.eps > 0) rec.distance_to_expected = norm(rec.eps * cp.xi - base);
    if (!cp.converged) {
      cs.all_converged = false;
      cs.all_certified = false;
    } else if (!rec.converged) {
      cs.all_certified = false;
    } else {
      dist.eps_values.push_back(eps);
      dist.values.push_back(rec.distance_to_expected);
      wn.eps_values.push_back(eps);
      wn.values.push_back(rec.w_norm_h1);
    }
    cs.records.push_back(rec);
  }

  try {
    cs.distance_fit = fit_series(dist);
    cs.distance_fit_ok = true;
  } catch (const NumericFailure&) {
  }
  try {
    cs.w_fit = fit_series(wn);
    cs.w_fit_ok = true;
  } catch (const NumericFailure&) {
  }

  if (cs.all_converged && cs.all_certified && !cs.records.empty()) {
    const ConcentrationRecord& coarse = cs.records.front();
    const ConcentrationRecord& fine = cs.records.back();
    const bool approaching =
        fine.distance_to_expected <=
        std::max(0.5 * coarse.distance_to_expected, 1e-12);
    const Vec3 y = fine.eps * fine.xi_star;
    cs.accumulation_ok = approaching && norm(sc.V.gradient(y)) < 1e-3;
  }
  return cs;
}

MultiplicityScan multiplicity_scan(Reducer& red, double eps, int n_radial,
                                   int n_angular, double half_width,
                                   const ConcentrationOptions& opt) {
  if (n_radial < 2 || n_angular < 4)
    throw InvalidModel("multiplicity_scan: grid too small");
  const Scenario& sc = red.scenario();
  MultiplicityScan ms;
  ms.eps = eps;

  const double rho0 = std::hypot(sc.x0[0], sc.x0[1]);
  const double rc = rho0 / eps;  // scan circle radius in blow-up coordinates
  const double x3 = sc.x0[2] / eps;
  const double rlo =
      rc > half_width + 1e-9 ? rc - half_width : half_width / n_radial;
  const double rhi = rc + half_width;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  ms.scan_xi.assign(size_t(n_radial) * n_angular, Vec3{0, 0, 0});
  ms.scan_phi.assign(size_t(n_radial) * n_angular, nan);

  // serpentine traversal so each solve warm-starts from a neighbor
  ReductionState warm;
  bool have_warm = false;
  for (int ir = 0; ir < n_radial; ++ir) {
    const double r = rlo + (rhi - rlo) * ir / (n_radial - 1);
    for (int k = 0; k < n_angular; ++k) {
      const int ia = (ir % 2 == 0) ? k : n_angular - 1 - k;
      const double th = 2.0 * M_PI * ia / n_angular;
      const Vec3 xi{r * std::cos(th), r * std::sin(th), x3};
      const size_t slot = size_t(ir) * n_angular + ia;
      ms.scan_xi[slot] = xi;
      try {
        const ReductionState st = have_warm
                                      ? red.solve_auxiliary(eps, xi, &warm)
                                      : red.solve_auxiliary(eps, xi);
        warm = st;
        have_warm = true;
        ms.scan_phi[slot] = red.reduced_phi(st).phi;
      } catch (const std::exception&) {
        // off-well scan points may fail to relax; leave the slot empty
      }
    }
  }

  // per-angle radial minimizers are the candidate generators
  std::vector<int> colmin(n_angular, -1);
  std::vector<double> colphi(n_angular, nan);
  for (int ia = 0; ia < n_angular; ++ia) {
    for (int ir = 0; ir < n_radial; ++ir) {
      const double v = ms.scan_phi[size_t(ir) * n_angular + ia];
      if (std::isnan(v)) continue;
      if (colmin[ia] < 0 || v < colphi[ia]) {
        colmin[ia] = ir;
        colphi[ia] = v;
      }
    }
  }

  // Either the angular profile is resolvable -- then its local extrema are
  // the candidates -- or it sits at rounding level (a numerically critical
  // circle) and a stride sample stands in for the basins.
  double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
  int n_ok = 0;
  for (int ia = 0; ia < n_angular; ++ia) {
    if (colmin[ia] < 0) continue;
    ++n_ok;
    cmin = std::min(cmin, colphi[ia]);
    cmax = std::max(cmax, colphi[ia]);
  }
  if (n_ok == 0) return ms;
  const bool resolvable = (cmax - cmin) > 1e-10 * std::max(1.0, std::fabs(cmin));

  std::vector<int> picks;
  if (resolvable) {
    for (int ia = 0; ia < n_angular; ++ia) {
      if (colmin[ia] < 0) continue;
      const int prev = (ia + n_angular - 1) % n_angular;
      const int next = (ia + 1) % n_angular;
      if (colmin[prev] < 0 || colmin[next] < 0) continue;
      const bool lo = colphi[ia] <= colphi[prev] && colphi[ia] <= colphi[next];
      const bool hi = colphi[ia] >= colphi[prev] && colphi[ia] >= colphi[next];
      if (lo || hi) picks.push_back(ia);
    }
  }
  if (picks.empty()) {
    const int stride = std::max(1, n_angular / 8);
    for (int ia = 0; ia < n_angular; ia += stride)
      if (colmin[ia] >= 0) picks.push_back(ia);
  }

  ConcentrationOptions popt = opt;
  // allow polishing to slide along the ring toward a symmetry-broken angle
  popt.radius = opt.radius + 0.8 * rc;
  for (int ia : picks) {
    const Vec3 guess = ms.scan_xi[size_t(colmin[ia]) * n_angular + ia];
    CriticalPoint cp = find_critical_xi(red, eps, guess, popt);
    if (cp.converged) ms.candidates.push_back(std::move(cp));
  }

  // greedy clustering by position, best (smallest gradient) representatives
  std::sort(ms.candidates.begin(), ms.candidates.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) {
              return a.grad_norm < b.grad_norm;
            });
  const double cluster_sep = 0.1;
  for (const CriticalPoint& cp : ms.candidates) {
    bool fresh = true;
    for (const ConcentrationRecord& rep : ms.distinct)
      if (norm(cp.xi - rep.xi_star) < cluster_sep) {
        fresh = false;
        break;
      }
    if (!fresh) continue;
    ConcentrationRecord rec = assemble_record(red, cp, opt);
    if (rec.converged) ms.distinct.push_back(std::move(rec));
  }
  return ms;
}

}  // namespace sbp
