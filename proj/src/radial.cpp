#include "sbp/radial.hpp"
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_odeiv2.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sbp/util.hpp"

namespace sbp {
namespace {

// |u|^{p-1} u, sign-safe for the overshoot branch where u dips negative
inline double sgnpow(double u, double p) {
  return std::copysign(std::pow(std::fabs(u), p), u);
}

struct OdeParams { double p; };

int ode_rhs(double r, const double y[], double dydr[], void* params) {
  const double p = static_cast<const OdeParams*>(params)->p;
  const double u = y[0], v = y[1];
  dydr[0] = v;
  dydr[1] = u - sgnpow(u, p) - 2.0 / r * v;
  return GSL_SUCCESS;
}

void disable_gsl_abort() {
  static bool done = false;
  if (!done) { gsl_set_error_handler_off(); done = true; }
}

// Taylor start:  u = A + a2 r^2 + a4 r^4 near r = 0 (u'(0) = 0)
void series_init(double p, double A, double r0, double& u, double& v) {
  const double a2 = (A - std::pow(A, p)) / 6.0;
  const double a4 = a2 * (1.0 - p * std::pow(A, p - 1.0)) / 20.0;
  u = A + a2 * r0 * r0 + a4 * r0 * r0 * r0 * r0;
  v = 2.0 * a2 * r0 + 4.0 * a4 * r0 * r0 * r0;
}

enum class Shot { undershoot, overshoot };

constexpr double kSeriesR0 = 1e-2;

const gsl_odeiv2_step_type* step_type(int method) {
  return method == 0 ? gsl_odeiv2_step_rkf45 : gsl_odeiv2_step_rk8pd;
}

// March the shot and watch for the two mutually exclusive failure modes:
// u crossing zero (A too large) or u' turning positive while u > 0 (A too
// small).  A shot that survives to r_stop is an undershoot for bisection
// purposes (the exact ground state is the measure-zero separatrix).
Shot classify(double p, double A, const gsl_odeiv2_step_type* st) {
  disable_gsl_abort();
  OdeParams par{p};
  gsl_odeiv2_system sys{ode_rhs, nullptr, 2, &par};
  gsl_odeiv2_driver* drv =
      gsl_odeiv2_driver_alloc_y_new(&sys, st, 1e-6, 1e-14, 1e-13);
  double r = kSeriesR0;
  double y[2];
  series_init(p, A, r, y[0], y[1]);
  Shot result = Shot::undershoot;
  for (int k = 1; k <= 500; ++k) {
    const double rt = kSeriesR0 + 0.05 * k;
    const int status = gsl_odeiv2_driver_apply(drv, &r, rt, y);
    if (status != GSL_SUCCESS) {
      result = (y[0] < 0) ? Shot::overshoot : Shot::undershoot;
      break;
    }
    if (y[0] <= 0) { result = Shot::overshoot; break; }
    if (y[1] >= 0) { result = Shot::undershoot; break; }
  }
  gsl_odeiv2_driver_free(drv);
  return result;
}

double bisect_u0(double p, const gsl_odeiv2_step_type* st, double tol) {
  if (!(p > 1.0) || !(p < 5.0))
    throw InvalidModel("ground state requires 1 < p < 5 (subcritical in R^3)");
  double lo = 1.0, hi = 10.0;
  while (classify(p, hi, st) == Shot::undershoot) {
    hi *= 2.0;
    if (hi > 1024.0)
      throw InvalidModel("ground state: no overshoot bracket up to u0 = 1024");
  }
  for (int it = 0; it < 200 && (hi - lo) > tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (classify(p, mid, st) == Shot::overshoot) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

// 4th-order stencils with mirror closure at r=0 and a decay closure at r_max:
// ghost nodes u_{N+k} = g_k u_N with g_k = (r_N/(r_N+kh)) e^{-kh}, exact for
// the e^{-r}/r far field of the linearized equation.
struct Stencils {
  int N;            // last node index
  double h;
  double g1, g2;    // ghost factors
  double idx(const std::vector<double>& u, int i) const {
    if (i < 0) return u[-i];                // mirror through r = 0
    if (i > N) return (i - N == 1 ? g1 : g2) * u[N];
    return u[i];
  }
  double d2(const std::vector<double>& u, int i) const {  // u''(r_i)
    return (-idx(u, i - 2) + 16 * idx(u, i - 1) - 30 * u[i] + 16 * idx(u, i + 1) -
            idx(u, i + 2)) / (12 * h * h);
  }
  double d1(const std::vector<double>& u, int i) const {  // u'(r_i)
    return (idx(u, i - 2) - 8 * idx(u, i - 1) + 8 * idx(u, i + 1) -
            idx(u, i + 2)) / (12 * h);
  }
};

// Residual of the collocation system (interior rows use -u'' - (2/r)u' + u - u^p,
// the r=0 row uses the radial limit -3u''(0) + u - u^p).
void collocation_residual(const Stencils& st, double p,
                          const std::vector<double>& u, std::vector<double>& F) {
  const int N = st.N;
  F.resize(N + 1);
  F[0] = -3.0 * st.d2(u, 0) + u[0] - sgnpow(u[0], p);
  for (int i = 1; i <= N; ++i) {
    const double r = i * st.h;
    F[i] = -st.d2(u, i) - (2.0 / r) * st.d1(u, i) + u[i] - sgnpow(u[i], p);
  }
}

// Newton polish of the marched profile on the uniform grid.  The Jacobian is
// pentadiagonal apart from the decay-closure entries in column N.
void collocation_polish(double p, double h, int N, std::vector<double>& u,
                        double g1, double g2) {
  Stencils st{N, h, g1, g2};
  using Trip = Eigen::Triplet<double>;
  std::vector<double> F;
  double best = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 12; ++iter) {
    collocation_residual(st, p, u, F);
    double fmax = 0, umax = 0;
    for (int i = 0; i <= N; ++i) {
      fmax = std::max(fmax, std::fabs(F[i]));
      umax = std::max(umax, std::fabs(u[i]));
    }
    const double scale = std::max(1.0, std::pow(umax, p));
    if (fmax < 1e-12 * scale) return;
    // the second-difference evaluation itself carries ~eps*u/h^2 rounding
    // noise; accept once the iteration stagnates below a safe multiple of it
    if (iter > 0 && fmax > 0.5 * best) {
      if (fmax < 1e-7 * scale) return;
      throw NumericFailure("ground state: collocation Newton stagnated high");
    }
    best = std::min(best, fmax);

    std::vector<Trip> trip;
    trip.reserve(6 * (N + 1));
    const double ih2 = 1.0 / (12 * h * h), ih1 = 1.0 / (12 * h);
    auto add = [&](int row, int col, double val) {
      if (col < 0) col = -col;                       // mirror folds into +col
      double factor = 1.0;
      if (col > N) { factor = (col - N == 1) ? g1 : g2; col = N; }
      trip.emplace_back(row, col, val * factor);
    };
    // row 0: -3 * d2 + (1 - p|u|^{p-1})
    add(0, -2, 3.0 * ih2); add(0, -1, -48.0 * ih2); add(0, 0, 90.0 * ih2);
    add(0, 1, -48.0 * ih2); add(0, 2, 3.0 * ih2);
    trip.emplace_back(0, 0, 1.0 - p * std::pow(std::fabs(u[0]), p - 1.0));
    for (int i = 1; i <= N; ++i) {
      const double r = i * h, c1 = 2.0 / r;
      // -d2 - (2/r) d1
      add(i, i - 2, ih2 - c1 * ih1);
      add(i, i - 1, -16.0 * ih2 + 8.0 * c1 * ih1);
      add(i, i, 30.0 * ih2);
      add(i, i + 1, -16.0 * ih2 - 8.0 * c1 * ih1);
      add(i, i + 2, ih2 + c1 * ih1);
      trip.emplace_back(i, i, 1.0 - p * std::pow(std::fabs(u[i]), p - 1.0));
    }
    Eigen::SparseMatrix<double> J(N + 1, N + 1);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw NumericFailure("ground state: collocation Jacobian factorization failed");
    Eigen::VectorXd rhs(N + 1);
    for (int i = 0; i <= N; ++i) rhs[i] = -F[i];
    const Eigen::VectorXd duv = lu.solve(rhs);
    for (int i = 0; i <= N; ++i) u[i] += duv[i];
  }
  throw NumericFailure("ground state: collocation Newton did not converge");
}

}  // namespace

double shoot_u0(double p, int method, double tol) {
  return bisect_u0(p, step_type(method), tol);
}

RadialProfile solve_ground_state(double p, double tol, double r_max) {
  disable_gsl_abort();
  const gsl_odeiv2_step_type* st = step_type(0);
  const double A = bisect_u0(p, st, tol);

  RadialProfile prof;
  prof.p = p;
  prof.r_max = r_max;
  prof.h = 0.0025;
  prof.tol = tol;
  const int N = static_cast<int>(std::llround(r_max / prof.h));
  prof.r.resize(N + 1);
  prof.u.assign(N + 1, 0.0);
  prof.du.assign(N + 1, 0.0);
  for (int i = 0; i <= N; ++i) prof.r[i] = i * prof.h;

  // dense march up to r = 8 (beyond that the unstable mode contaminates the
  // shot); e^{-r}/r continuation seeds the far region for the polish
  OdeParams par{p};
  gsl_odeiv2_system sys{ode_rhs, nullptr, 2, &par};
  gsl_odeiv2_driver* drv =
      gsl_odeiv2_driver_alloc_y_new(&sys, st, 1e-6, 1e-14, 1e-13);
  double rr = kSeriesR0;
  double y[2];
  series_init(p, A, rr, y[0], y[1]);
  const int i_sw = static_cast<int>(std::llround(8.0 / prof.h));
  for (int i = 0; i <= N; ++i) {
    const double rt = prof.r[i];
    if (rt <= kSeriesR0) {
      double uu, vv;
      series_init(p, A, rt == 0 ? 0.0 : rt, uu, vv);
      prof.u[i] = uu;
      continue;
    }
    if (i > i_sw) break;
    if (gsl_odeiv2_driver_apply(drv, &rr, rt, y) != GSL_SUCCESS)
      throw NumericFailure("ground state: dense pass integration failed");
    prof.u[i] = y[0];
  }
  gsl_odeiv2_driver_free(drv);
  const double c_guess = prof.u[i_sw] * 8.0 * std::exp(8.0);
  for (int i = i_sw + 1; i <= N; ++i)
    prof.u[i] = c_guess * std::exp(-prof.r[i]) / prof.r[i];

  const double g1 = (r_max / (r_max + prof.h)) * std::exp(-prof.h);
  const double g2 = (r_max / (r_max + 2 * prof.h)) * std::exp(-2 * prof.h);
  collocation_polish(p, prof.h, N, prof.u, g1, g2);

  Stencils stn{N, prof.h, g1, g2};
  // derivative extraction one order above the collocation stencils (6th):
  // the moment integrals inherit the u/du consistency level, and at 4th
  // order the integration-by-parts identities plateau near 5e-10.  Mirror
  // ghosts across r = 0 (U is even); the far edge keeps the 4th-order
  // closure, where u has decayed to ~1e-13 of the peak.
  prof.du[0] = 0.0;
  auto uat = [&](int i) { return prof.u[static_cast<size_t>(i < 0 ? -i : i)]; };
  for (int i = 1; i <= N; ++i) {
    if (i + 3 <= N) {
      prof.du[i] = (-uat(i - 3) + 9.0 * uat(i - 2) - 45.0 * uat(i - 1) +
                    45.0 * uat(i + 1) - 9.0 * uat(i + 2) + uat(i + 3)) /
                   (60.0 * prof.h);
    } else {
      prof.du[i] = stn.d1(prof.u, i);
    }
  }
  prof.u0 = prof.u[0];
  prof.tail_c = prof.u[N] * r_max * std::exp(r_max);
  return prof;
}

double RadialProfile::value(double rr) const {
  rr = std::fabs(rr);
  if (rr >= r_max) return tail_c * std::exp(-rr) / rr;
  const double s = rr / h;
  size_t i = static_cast<size_t>(s);
  if (i >= u.size() - 1) i = u.size() - 2;
  const double t = s - static_cast<double>(i);
  const double t2 = t * t, t3 = t2 * t;
  return u[i] * (2 * t3 - 3 * t2 + 1) + h * du[i] * (t3 - 2 * t2 + t) +
         u[i + 1] * (-2 * t3 + 3 * t2) + h * du[i + 1] * (t3 - t2);
}

double RadialProfile::deriv(double rr) const {
  rr = std::fabs(rr);
  if (rr >= r_max) {
    return -tail_c * std::exp(-rr) * (1.0 + 1.0 / rr) / rr;
  }
  const double s = rr / h;
  size_t i = static_cast<size_t>(s);
  if (i >= u.size() - 1) i = u.size() - 2;
  const double t = s - static_cast<double>(i);
  const double t2 = t * t;
  return u[i] * (6 * t2 - 6 * t) / h + du[i] * (3 * t2 - 4 * t + 1) +
         u[i + 1] * (6 * t - 6 * t2) / h + du[i + 1] * (3 * t2 - 2 * t);
}

double ode_residual_max(const RadialProfile& prof) {
  const int N = static_cast<int>(prof.u.size()) - 1;
  if (N < 5 || prof.h <= 0)
    throw InvalidModel("ode_residual_max: profile not initialized");
  const double g1 = (prof.r_max / (prof.r_max + prof.h)) * std::exp(-prof.h);
  const double g2 =
      (prof.r_max / (prof.r_max + 2 * prof.h)) * std::exp(-2 * prof.h);
  const Stencils st{N, prof.h, g1, g2};
  std::vector<double> F;
  collocation_residual(st, prof.p, prof.u, F);
  double m = 0;
  for (double v : F) m = std::max(m, std::fabs(v));
  return m;
}

GroundConstants ground_constants(const RadialProfile& prof) {
  const int N = static_cast<int>(prof.u.size()) - 1;
  const double h = prof.h;
  auto simpson_stride = [&](auto&& f, int stride) {
    const int M = N / stride;
    double s = f(0) + f(N);
    for (int i = 1; i < M; i += 2) s += 4.0 * f(i * stride);
    for (int i = 2; i < M; i += 2) s += 2.0 * f(i * stride);
    return s * (h * stride) / 3.0;
  };
  // one Richardson step on composite Simpson (h^6): the integration-by-parts
  // identities tying the moments to the norms then close to ~1e-13 instead
  // of the ~5e-10 left by plain Simpson at this node spacing
  auto simpson = [&](auto&& f) {
    const double s1 = simpson_stride(f, 1);
    if (N % 4 != 0) return s1;
    return s1 + (s1 - simpson_stride(f, 2)) / 15.0;
  };
  const double fourpi = 4.0 * M_PI;
  GroundConstants gc;
  gc.p = prof.p;
  gc.u0 = prof.u0;
  gc.l2sq = fourpi * simpson([&](int i) { return sqr(prof.r[i] * prof.u[i]); });
  gc.grad_sq = fourpi * simpson([&](int i) { return sqr(prof.r[i] * prof.du[i]); });
  gc.h1sq = gc.l2sq + gc.grad_sq;
  gc.lp1 = fourpi * simpson([&](int i) {
    return sqr(prof.r[i]) * std::pow(std::fabs(prof.u[i]), prof.p + 1.0);
  });
  gc.c0 = (0.5 - 1.0 / (prof.p + 1.0)) * gc.lp1;
  gc.theta = (prof.p + 1.0) / (prof.p - 1.0) - 1.5;
  // angular average of w_j^a over S^2 is 4pi/(a+1) for even a, 0 for odd
  for (int a = 0; a <= 4; a += 2) {
    gc.moment_a[a] = fourpi / (a + 1.0) *
        simpson([&](int i) { return std::pow(prof.r[i], a + 2.0) * sqr(prof.u[i]); });
  }
  for (int b = 1; b <= 4; b += 2) {
    gc.moment_b[b] = fourpi / (b + 2.0) *
        simpson([&](int i) {
          return std::pow(prof.r[i], b + 2.0) * prof.u[i] * prof.du[i];
        });
  }
  return gc;
}

double dilated_value(const RadialProfile& prof, double lam, double rr) {
  return std::pow(lam, 2.0 / (prof.p - 1.0)) * prof.value(lam * rr);
}

double dilated_deriv(const RadialProfile& prof, double lam, double rr) {
  return std::pow(lam, 2.0 / (prof.p - 1.0)) * lam * prof.deriv(lam * rr);
}

void save_profile(const RadialProfile& prof, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# ground-state radial profile\n";
  out << "# p " << format_g17(prof.p) << "\n";
  out << "# u0 " << format_g17(prof.u0) << "\n";
  out << "# r_max " << format_g17(prof.r_max) << "\n";
  out << "# h " << format_g17(prof.h) << "\n";
  out << "# tol " << format_g17(prof.tol) << "\n";
  out << "# tail_c " << format_g17(prof.tail_c) << "\n";
  out << "# columns: r u\n";
  for (size_t i = 0; i < prof.r.size(); ++i)
    out << format_g17(prof.r[i]) << " " << format_g17(prof.u[i]) << "\n";
}

RadialProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  RadialProfile prof;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      double v;
      if (key == "p" && (ss >> v)) prof.p = v;
      else if (key == "u0" && (ss >> v)) prof.u0 = v;
      else if (key == "r_max" && (ss >> v)) prof.r_max = v;
      else if (key == "h" && (ss >> v)) prof.h = v;
      else if (key == "tol" && (ss >> v)) prof.tol = v;
      else if (key == "tail_c" && (ss >> v)) prof.tail_c = v;
      continue;
    }
    std::istringstream ss(line);
    double rr, uu;
    if (ss >> rr >> uu) {
      prof.r.push_back(rr);
      prof.u.push_back(uu);
    }
  }
  if (prof.r.size() < 5 || prof.h <= 0)
    throw std::runtime_error("profile file malformed: " + path);
  const int N = static_cast<int>(prof.r.size()) - 1;
  const double g1 = (prof.r_max / (prof.r_max + prof.h)) * std::exp(-prof.h);
  const double g2 = (prof.r_max / (prof.r_max + 2 * prof.h)) * std::exp(-2 * prof.h);
  Stencils stn{N, prof.h, g1, g2};
  prof.du.assign(N + 1, 0.0);
  for (int i = 1; i <= N; ++i) prof.du[i] = stn.d1(prof.u, i);
  return prof;
}

}  // namespace sbp
