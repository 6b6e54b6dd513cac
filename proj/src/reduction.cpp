#include "sbp/reduction.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "sbp/util.hpp"

namespace sbp {
namespace {

// ------------------------------------------------------------------------
// Preconditioned MINRES (Paige-Saunders recurrences) on plain contiguous
// vectors; the caller supplies the operator, the preconditioner and the inner
// product, so the same routine serves both the soliton polish (pure field)
// and the bordered corrector system (field plus three multipliers).
// ------------------------------------------------------------------------

using Vec = std::vector<double>;
using Op = std::function<void(const Vec&, Vec&)>;
using Dot = std::function<double(const Vec&, const Vec&)>;

struct LinStats {
  int iters = 0;
  double relres = 1.0;
  bool converged = false;
};

LinStats pminres(const Op& A, const Op& Minv, const Dot& dot, const Vec& b,
                 Vec& x, double rtol, int maxit) {
  const size_t N = b.size();
  LinStats stats;
  Vec r1(N), y(N), v(N), r2(N), w(N, 0.0), w2(N, 0.0), wk(N), Av(N);

  // r1 = b - A x  (x may arrive warm)
  A(x, Av);
  for (size_t j = 0; j < N; ++j) r1[j] = b[j] - Av[j];
  Minv(r1, y);
  double beta1 = dot(r1, y);
  if (beta1 < 0) throw NumericFailure("minres: preconditioner is not positive");
  beta1 = std::sqrt(beta1);
  if (beta1 == 0) {
    stats.converged = true;
    stats.relres = 0;
    return stats;
  }

  double oldb = 0, beta = beta1, dbar = 0, epsln = 0, phibar = beta1;
  double cs = -1, sn = 0;
  r2 = r1;

  for (int it = 1; it <= maxit; ++it) {
    const double s = 1.0 / beta;
    for (size_t j = 0; j < N; ++j) v[j] = s * y[j];
    A(v, Av);
    if (it >= 2) {
      const double c = beta / oldb;
      for (size_t j = 0; j < N; ++j) Av[j] -= c * r1[j];
    }
    const double alfa = dot(v, Av);
    {
      const double c = alfa / beta;
      for (size_t j = 0; j < N; ++j) Av[j] -= c * r2[j];
    }
    r1 = r2;
    r2 = Av;
    Minv(r2, y);
    oldb = beta;
    double b2 = dot(r2, y);
    if (b2 < 0) throw NumericFailure("minres: preconditioner is not positive");
    beta = std::sqrt(b2);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const double dg = 1.0 / gamma;
    for (size_t j = 0; j < N; ++j)
      wk[j] = (v[j] - oldeps * w[j] - delta * w2[j]) * dg;
    w = w2;
    w2 = wk;
    for (size_t j = 0; j < N; ++j) x[j] += phi * wk[j];

    stats.iters = it;
    stats.relres = phibar / beta1;
    if (phibar <= rtol * beta1) {
      stats.converged = true;
      break;
    }
  }
  return stats;
}

double max_abs3(const std::array<double, 3>& a) {
  return std::max({std::fabs(a[0]), std::fabs(a[1]), std::fabs(a[2])});
}

}  // namespace

// ------------------------------------------------------------------------
// Reducer
// ------------------------------------------------------------------------

struct Reducer::Work {
  // recently relaxed profiles keyed by dilation; exact hits are returned
  // directly and the nearest entry seeds the Newton iteration otherwise
  std::vector<std::pair<double, Field>> memo;
  static constexpr size_t kMax = 10;
};

Reducer::Reducer(const Scenario& sc, const RadialProfile& prof, ReductionConfig cfg)
    : sc_(sc), prof_(prof), cfg_(cfg) {
  validate_scenario(sc_);
  if (std::fabs(prof_.p - sc_.p) > 1e-12)
    throw InvalidModel("reducer: radial profile exponent does not match scenario");
  gc_ = ground_constants(prof_);
  n_ = cfg_.grid_n > 0 ? cfg_.grid_n : sc_.grid_n;
  L_ = cfg_.grid_L > 0 ? cfg_.grid_L : sc_.grid_L;
  if (cfg_.newton_tol <= 0) cfg_.newton_tol = sc_.newton_tol;
  if (cfg_.constraint_tol <= 0) cfg_.constraint_tol = sc_.constraint_tol;
  sp_ = std::make_unique<Spectral>(n_, L_);
  work_ = std::make_unique<Work>();
}

Reducer::~Reducer() = default;

Grid3 Reducer::grid_for(const Vec3& xi) const {
  Grid3 g;
  g.n = n_;
  g.L = L_;
  g.center = xi;
  return g;
}

double Reducer::lambda_at(double eps, const Vec3& xi) const {
  const Vec3 y{eps * xi[0], eps * xi[1], eps * xi[2]};
  const double v = sc_.V.value(y);
  if (!(v > 0)) throw InvalidModel("lambda_at: V(eps xi) must be positive");
  return std::sqrt(v);
}

Field Reducer::sample_ansatz(double eps, const Vec3& xi, const Grid3& g) const {
  const double lam = lambda_at(eps, xi);
  return sample_radial(g, xi, [&](double r) { return dilated_value(prof_, lam, r); });
}

Field Reducer::make_z(double eps, const Vec3& xi, bool polish) {
  const double lam = lambda_at(eps, xi);
  if (polish) return polished_profile(lam);
  const Grid3 g = grid_for(xi);
  return sample_radial(g, xi, [&](double r) { return dilated_value(prof_, lam, r); });
}

Field Reducer::polished_profile(double lam) {
  // the relaxed array depends only on lam: the node offsets are the same for
  // every recentered grid, so results are shared across xi
  const Grid3 g = grid_for({0, 0, 0});
  Field z;
  double best_gap = 1e300;
  for (const auto& entry : work_->memo) {
    const double gap = std::fabs(entry.first - lam);
    if (entry.first == lam) return entry.second;
    if (gap < best_gap && gap < 0.25 * lam) {
      best_gap = gap;
      z = entry.second;
    }
  }
  if (z.empty())
    z = sample_radial(g, g.center,
                      [&](double r) { return dilated_value(prof_, lam, r); });

  // damped Newton on  F(u) = -Lap u + lam^2 u - |u|^{p-1} u
  const double lam2 = lam * lam;
  const double p = sc_.p;
  const size_t N = z.size();
  const double h3 = std::pow(g.h(), 3);
  const Dot dot = [&](const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t j = 0; j < N; ++j) s += a[j] * b[j];
    return s * h3;
  };
  const Op prec = [&](const Vec& r, Vec& out) { sp_->helmholtz_inverse(r, lam2, out); };
  Field F(N), up(N), delta(N), trial(N);
  auto eval_residual = [&](const Field& u, Field& out) {
    sp_->laplacian(u, out);
    signed_power(u, p, up);
    for (size_t j = 0; j < N; ++j) out[j] = -out[j] + lam2 * u[j] - up[j];
  };
  eval_residual(z, F);
  double dual = sp_->dual_norm_h1(F);
  const double tol = 1e-11;
  int stall = 0;
  for (int it = 0; it < 25 && dual > tol; ++it) {
    Field pd(N);
    power_deriv(z, p, pd);
    const Op J = [&](const Vec& x, Vec& out) {
      sp_->laplacian(x, out);
      for (size_t j = 0; j < N; ++j) out[j] = -out[j] + (lam2 - pd[j]) * x[j];
    };
    Vec rhs(N);
    for (size_t j = 0; j < N; ++j) rhs[j] = -F[j];
    delta.assign(N, 0.0);
    pminres(J, prec, dot, rhs, delta, std::min(1e-2, 0.1 * dual), 300);
    double t = 1.0;
    double best = dual;
    Field bestu = z;
    bool accepted = false;
    for (int half = 0; half < 8; ++half) {
      for (size_t j = 0; j < N; ++j) trial[j] = z[j] + t * delta[j];
      eval_residual(trial, F);
      const double d2 = sp_->dual_norm_h1(F);
      if (d2 < best * (1.0 - 1e-4 * t) || d2 < tol) {
        z = trial;
        dual = d2;
        accepted = true;
        break;
      }
      if (d2 < best) {
        best = d2;
        bestu = trial;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (best < dual) {
        z = bestu;
        dual = best;
        stall = 0;
      } else if (++stall >= 2) {
        if (dual < 1e-8) break;  // rounding floor of the dual norm
        throw NumericFailure("soliton polish stalled at dual norm " +
                             format_g17(dual));
      }
      eval_residual(z, F);
    }
  }
  if (dual > 1e-8)
    throw NumericFailure("soliton polish did not reach tolerance, dual norm " +
                         format_g17(dual));
  if (work_->memo.size() >= Work::kMax)
    work_->memo.erase(work_->memo.begin());
  work_->memo.emplace_back(lam, z);
  return z;
}

std::array<Field, 3> Reducer::make_tangents(double eps, const Vec3& xi,
                                            const Field& z) {
  const double lam = lambda_at(eps, xi);
  const Vec3 y{eps * xi[0], eps * xi[1], eps * xi[2]};
  const Vec3 gV = sc_.V.gradient(y);
  const double gVmax = std::max({std::fabs(gV[0]), std::fabs(gV[1]),
                                 std::fabs(gV[2])});

  Field dzdlam;
  if (gVmax > 0) {
    if (cfg_.polish_z) {
      const double dl = 1e-3 * lam;
      const Field zp = polished_profile(lam + dl);
      const Field zm = polished_profile(lam - dl);
      dzdlam.resize(z.size());
      for (size_t j = 0; j < z.size(); ++j)
        dzdlam[j] = (zp[j] - zm[j]) / (2.0 * dl);
    } else {
      const Grid3 g = grid_for(xi);
      const double a = 2.0 / (sc_.p - 1.0);
      dzdlam = sample_radial(g, xi, [&](double r) {
        return a * std::pow(lam, a - 1.0) * prof_.value(lam * r) +
               std::pow(lam, a) * r * prof_.deriv(lam * r);
      });
    }
  }

  std::array<Field, 3> t;
  for (int i = 0; i < 3; ++i) {
    const double dlam = eps * gV[i] / (2.0 * lam);
    sp_->partial(z, i, t[i]);
    if (dlam != 0)
      for (size_t j = 0; j < t[i].size(); ++j)
        t[i][j] = dlam * dzdlam[j] - t[i][j];
    else
      for (size_t j = 0; j < t[i].size(); ++j) t[i][j] = -t[i][j];
  }
  return t;
}

double Reducer::pseudo_residual_norm(double eps, const Vec3& xi) {
  const Grid3 g = grid_for(xi);
  Field z = make_z(eps, xi);
  EnergyModel em(sc_, eps, g, *sp_);
  return em.resid_dual_norm(z);
}

ReductionState Reducer::solve_auxiliary(double eps, const Vec3& xi) {
  return solve_auxiliary(eps, xi, nullptr);
}

ReductionState Reducer::solve_auxiliary(double eps, const Vec3& xi,
                                        const ReductionState* warm) {
  ReductionState st;
  st.eps = eps;
  st.xi = xi;
  st.grid = grid_for(xi);
  st.lambda = lambda_at(eps, xi);
  st.z = make_z(eps, xi);
  st.tangents = make_tangents(eps, xi, st.z);
  EnergyModel em(sc_, eps, st.grid, *sp_);

  const size_t N = st.z.size();
  const double lam2 = st.lambda * st.lambda;
  const double h3 = std::pow(st.grid.h(), 3);

  std::array<Field, 3> b;
  std::array<double, 3> gam{};
  Field tmp(N);
  for (int i = 0; i < 3; ++i) {
    sp_->h1_apply(st.tangents[i], b[i]);
    sp_->helmholtz_inverse(b[i], lam2, tmp);
    gam[i] = sp_->inner_l2(b[i], tmp);
    if (!(gam[i] > 0))
      throw NumericFailure("corrector solve: degenerate tangent normalization");
  }

  if (warm && warm->w.size() == N) {
    st.w = warm->w;
    st.alpha = warm->alpha;
  } else {
    st.w.assign(N, 0.0);
    st.alpha = {0, 0, 0};
  }

  const double ntol = cfg_.newton_tol;
  const double ctol = cfg_.constraint_tol;

  Field u(N), F1(N);
  auto assemble = [&](const Field& w, const std::array<double, 3>& alpha,
                      std::array<double, 3>& cons) {
    for (size_t j = 0; j < N; ++j) u[j] = st.z[j] + w[j];
    em.residual(u, F1);
    for (int i = 0; i < 3; ++i) {
      field_axpy(-alpha[i], b[i], F1);
      cons[i] = sp_->inner_l2(b[i], w);
    }
    return sp_->dual_norm_h1(F1);
  };

  std::array<double, 3> cons{};
  double dual = assemble(st.w, st.alpha, cons);

  const size_t M = N + 3;  // field plus three multipliers
  const Dot dot = [&](const Vec& a, const Vec& c) {
    double s = 0;
    for (size_t j = 0; j < N; ++j) s += a[j] * c[j];
    s *= h3;
    for (size_t j = N; j < M; ++j) s += a[j] * c[j];
    return s;
  };

  Field wtrial(N), hx(N), xf(N);
  double rtol_cur = cfg_.lin_rtol;
  for (int it = 0; it < cfg_.max_newton; ++it) {
    if (dual <= ntol && max_abs3(cons) <= ctol) {
      st.converged = true;
      break;
    }
    EnergyModel::Hess H = em.hessian(u);
    const Op A = [&](const Vec& x, Vec& out) {
      std::copy(x.begin(), x.begin() + N, xf.begin());
      H.apply(xf, hx);
      out.resize(M);
      for (size_t j = 0; j < N; ++j) {
        double s = hx[j];
        for (int i = 0; i < 3; ++i) s -= x[N + i] * b[i][j];
        out[j] = s;
      }
      for (int i = 0; i < 3; ++i) out[N + i] = -sp_->inner_l2(b[i], xf);
    };
    const Op Minv = [&](const Vec& r, Vec& out) {
      std::copy(r.begin(), r.begin() + N, xf.begin());
      sp_->helmholtz_inverse(xf, lam2, hx);
      out.resize(M);
      std::copy(hx.begin(), hx.end(), out.begin());
      for (int i = 0; i < 3; ++i) out[N + i] = r[N + i] / gam[i];
    };
    Vec rhs(M), sol(M, 0.0);
    for (size_t j = 0; j < N; ++j) rhs[j] = -F1[j];
    for (int i = 0; i < 3; ++i) rhs[N + i] = cons[i];
    LinStats ls = pminres(A, Minv, dot, rhs, sol, rtol_cur, cfg_.max_minres);
    st.minres_iters += ls.iters;

    const double dual_prev = dual;
    double t = 1.0;
    std::array<double, 3> atrial{}, ctrial{};
    for (int half = 0; half < 4; ++half) {
      for (size_t j = 0; j < N; ++j) wtrial[j] = st.w[j] + t * sol[j];
      for (int i = 0; i < 3; ++i) atrial[i] = st.alpha[i] + t * sol[N + i];
      const double d2 = assemble(wtrial, atrial, ctrial);
      if (d2 < dual * (1.0 - 1e-4 * t) || d2 <= ntol || half == 3) {
        st.w = wtrial;
        st.alpha = atrial;
        dual = d2;
        cons = ctrial;
        break;
      }
      t *= 0.5;
    }
    st.newton_iters = it + 1;
    // a stalled contraction usually means the linear solves are too loose
    if (dual > 0.5 * dual_prev) rtol_cur = std::max(0.05 * rtol_cur, 1e-8);
  }

  if (max_abs3(cons) > ctol) {
    // the constraints are linear, so one exact Gram projection restores them
    Eigen::Matrix3d G;
    Eigen::Vector3d rv;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) G(i, j) = sp_->inner_l2(b[i], st.tangents[j]);
      rv(i) = cons[i];
    }
    const Eigen::Vector3d c = G.fullPivLu().solve(rv);
    for (int i = 0; i < 3; ++i) field_axpy(-c(i), st.tangents[i], st.w);
    dual = assemble(st.w, st.alpha, cons);
  }

  st.residual_dual_norm = dual;
  st.constraint_residuals = cons;
  st.converged = dual <= ntol && max_abs3(cons) <= ctol;
  if (!st.converged)
    throw NumericFailure(
        "corrector solve did not converge: dual " + format_g17(dual) +
        ", constraint " + format_g17(max_abs3(cons)) + " at eps " +
        format_g17(eps));
  return st;
}

double Reducer::coercivity_check(const ReductionState& st, int n_probe,
                                 uint64_t seed) {
  if (n_probe < 1) throw InvalidModel("coercivity_check: need n_probe >= 1");
  EnergyModel em(sc_, st.eps, st.grid, *sp_);
  const size_t N = st.z.size();
  Field u(N);
  for (size_t j = 0; j < N; ++j) u[j] = st.z[j] + st.w[j];
  EnergyModel::Hess H = em.hessian(u);

  // H1 Gram of the directions to project away: z and the three tangents
  std::array<const Field*, 4> base{&st.z, &st.tangents[0], &st.tangents[1],
                                   &st.tangents[2]};
  Eigen::Matrix4d G;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      const double g =
          sp_->grad_inner(*base[i], *base[j]) + sp_->inner_l2(*base[i], *base[j]);
      G(i, j) = g;
      G(j, i) = g;
    }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(G);

  CounterRng rng{seed};
  double worst = 1e300;
  Field x(N), hx(N);
  for (int k = 0; k < n_probe; ++k) {
    const uint64_t c0 = static_cast<uint64_t>(k) * 16;
    // a localized lump with random center, width, and axis modulation
    Vec3 ctr;
    for (int d = 0; d < 3; ++d)
      ctr[d] = st.grid.center[d] + (rng.uniform(c0 + d) - 0.5) * L_;
    const double sig = 0.8 + 1.4 * rng.uniform(c0 + 3);
    const int mod_axis = static_cast<int>(rng.uniform(c0 + 4) * 3.0);
    const bool odd = rng.uniform(c0 + 5) > 0.5;
    for (int ix = 0; ix < st.grid.n; ++ix)
      for (int iy = 0; iy < st.grid.n; ++iy)
        for (int iz = 0; iz < st.grid.n; ++iz) {
          const Vec3 p{st.grid.coord(0, ix), st.grid.coord(1, iy),
                       st.grid.coord(2, iz)};
          const double r2 = sqr(p[0] - ctr[0]) + sqr(p[1] - ctr[1]) +
                            sqr(p[2] - ctr[2]);
          double val = std::exp(-r2 / (sig * sig));
          if (odd) val *= (p[mod_axis] - ctr[mod_axis]);
          x[st.grid.idx(ix, iy, iz)] = val;
        }
    Eigen::Vector4d rv;
    for (int i = 0; i < 4; ++i)
      rv(i) = sp_->grad_inner(*base[i], x) + sp_->inner_l2(*base[i], x);
    const Eigen::Vector4d c = lu.solve(rv);
    for (int i = 0; i < 4; ++i) field_axpy(-c(i), *base[i], x);
    const double den = sp_->norm_h1_sq(x);
    if (!(den > 1e-12)) continue;  // probe vanished inside the projected span
    H.apply(x, hx);
    worst = std::min(worst, sp_->inner_l2(hx, x) / den);
  }
  if (worst == 1e300)
    throw NumericFailure("coercivity_check: all probes degenerate");
  return worst;
}

DecompositionReport Reducer::reduced_phi(const ReductionState& st) {
  EnergyModel em(sc_, st.eps, st.grid, *sp_);
  const size_t N = st.z.size();
  const double lam2 = st.lambda * st.lambda;
  const double p = sc_.p;
  const double h3 = std::pow(st.grid.h(), 3);
  const Field& veps = em.veps();

  Field u(N);
  for (size_t j = 0; j < N; ++j) u[j] = st.z[j] + st.w[j];

  double z_l2 = 0, zw = 0, vz2 = 0, vzw = 0, vw2 = 0, lp1_z = 0, lp1_u = 0;
  for (size_t j = 0; j < N; ++j) {
    const double z = st.z[j], w = st.w[j];
    z_l2 += z * z;
    zw += z * w;
    vz2 += veps[j] * z * z;
    vzw += veps[j] * z * w;
    vw2 += veps[j] * w * w;
    lp1_z += std::pow(std::fabs(z), p + 1.0);
    lp1_u += std::pow(std::fabs(u[j]), p + 1.0);
  }
  z_l2 *= h3;
  zw *= h3;
  vz2 *= h3;
  vzw *= h3;
  vw2 *= h3;
  lp1_z *= h3;
  lp1_u *= h3;

  const double gz = sp_->grad_inner(st.z, st.z);
  const double gzw = sp_->grad_inner(st.z, st.w);
  const double gw = sp_->grad_inner(st.w, st.w);

  DecompositionReport rep;
  rep.leading = 0.5 * (gz + lam2 * z_l2) - lp1_z / (p + 1.0);
  rep.lambda_term = 0.5 * (vz2 - lam2 * z_l2) + (vzw - lam2 * zw);
  rep.omega_term = em.has_coupling()
                       ? 0.25 * std::pow(st.eps, 3) * em.quartic(u)
                       : 0.0;
  rep.psi_term = 0.5 * (gw + vw2) + (gzw + lam2 * zw) -
                 (lp1_u - lp1_z) / (p + 1.0);
  rep.phi = em.energy_sbp(u);
  rep.identity_defect =
      std::fabs(rep.phi -
                (rep.leading + rep.lambda_term + rep.omega_term + rep.psi_term)) /
      std::max(1.0, std::fabs(rep.phi));
  const Vec3 y{st.eps * st.xi[0], st.eps * st.xi[1], st.eps * st.xi[2]};
  rep.c0_vtheta = gc_.c0 * std::pow(sc_.V.value(y), gc_.theta);
  rep.nehari_defect = std::fabs(gz + lam2 * z_l2 - lp1_z) / lp1_z;
  rep.w_norm_h1 = std::sqrt(sp_->norm_h1_sq(st.w));
  return rep;
}

GradientResult Reducer::reduced_grad(const ReductionState& center) {
  const double hs = cfg_.fd_step;
  GradientResult gr;
  EnergyModel em(sc_, center.eps, center.grid, *sp_);
  const size_t N = center.z.size();
  const double eps = center.eps;
  const double h3 = std::pow(center.grid.h(), 3);
  Field u(N), R(N);
  for (size_t j = 0; j < N; ++j) u[j] = center.z[j] + center.w[j];
  em.residual(u, R);

  // On recentered grids the total xi-derivative of Phi splits into the pairing
  // of the residual with the array derivatives of (z, w) plus the explicit
  // motion of the coefficient samples V(eps x) and K(eps x) with the grid.
  Field phi_u;
  if (em.has_coupling()) {
    Field usq(N);
    for (size_t j = 0; j < N; ++j) usq[j] = u[j] * u[j];
    em.bp_potential(usq, phi_u);
  }

  // array derivative of z: the relaxed profile moves only through lam(eps xi)
  const double lam = center.lambda;
  const Vec3 y{eps * center.xi[0], eps * center.xi[1], eps * center.xi[2]};
  const Vec3 gV = sc_.V.gradient(y);
  Field dzdlam;
  if (std::max({std::fabs(gV[0]), std::fabs(gV[1]), std::fabs(gV[2])}) > 0 &&
      cfg_.polish_z) {
    const double dl = 1e-3 * lam;
    const Field zp = polished_profile(lam + dl);
    const Field zm = polished_profile(lam - dl);
    dzdlam.resize(N);
    for (size_t j = 0; j < N; ++j) dzdlam[j] = (zp[j] - zm[j]) / (2.0 * dl);
  }

  Field wdot(N);
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = center.xi, xm = center.xi;
    xp[i] += hs;
    xm[i] -= hs;
    ReductionState sp1 = solve_auxiliary(eps, xp, &center);
    ReductionState sm1 = solve_auxiliary(eps, xm, &center);
    DecompositionReport rp = reduced_phi(sp1);
    DecompositionReport rm = reduced_phi(sm1);
    gr.fd[i] = (rp.phi - rm.phi) / (2.0 * hs);
    gr.fd_remainder[i] =
        ((rp.phi - rp.leading) - (rm.phi - rm.leading)) / (2.0 * hs);

    for (size_t j = 0; j < N; ++j)
      wdot[j] = (sp1.w[j] - sm1.w[j]) / (2.0 * hs);
    double pair = sp_->inner_l2(R, wdot);
    const double dlam = eps * gV[i] / (2.0 * lam);
    if (dlam != 0) pair += dlam * sp_->inner_l2(R, dzdlam);

    // explicit part: d/dxi_i of the sampled coefficients at frozen arrays
    std::array<int, 3> ord{0, 0, 0};
    ord[i] = 1;
    double xv = 0, xk = 0;
    for (int ix = 0; ix < center.grid.n; ++ix)
      for (int iy = 0; iy < center.grid.n; ++iy)
        for (int iz = 0; iz < center.grid.n; ++iz) {
          const size_t j = center.grid.idx(ix, iy, iz);
          const Vec3 x{eps * center.grid.coord(0, ix),
                       eps * center.grid.coord(1, iy),
                       eps * center.grid.coord(2, iz)};
          xv += sc_.V.derivative(x, ord) * u[j] * u[j];
          if (em.has_coupling())
            xk += sc_.K.derivative(x, ord) * u[j] * u[j] * phi_u[j];
        }
    pair += 0.5 * eps * h3 * xv;
    if (em.has_coupling()) pair += 0.5 * std::pow(eps, 4) * h3 * xk;
    gr.pairing[i] = pair;
  }
  gr.discrepancy = std::max({std::fabs(gr.fd[0] - gr.pairing[0]),
                             std::fabs(gr.fd[1] - gr.pairing[1]),
                             std::fabs(gr.fd[2] - gr.pairing[2])});
  return gr;
}

}  // namespace sbp
