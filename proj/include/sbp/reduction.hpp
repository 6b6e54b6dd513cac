// Finite-dimensional reduction around the dilated soliton ansatz.  For a
// candidate concentration point xi the solver recenters the box at xi, builds
// z = lam^{2/(p-1)} U(lam |x - xi|) with lam = V(eps xi)^{1/2}, solves the
// corrector problem
//     E'(z + w) = sum_i alpha_i (-Lap + 1) zdot_i,   <w, zdot_i>_{H1} = 0,
// by a Newton iteration with matrix-free saddle-point linear algebra, and
// evaluates the reduced energy Phi(xi) = E(z + w) together with its
// decomposition into a dilation-only part, potential and quartic corrections,
// and a quadratic remainder.  The gradient of Phi is produced by two
// independent routes (recentered finite differences of Phi, and pairing the
// Euler-Lagrange residual with the transported family derivatives) so every
// downstream consumer can check their agreement.
#pragma once

#include <array>
#include <cstdint>
#include <memory>

#include "sbp/energy.hpp"
#include "sbp/grid.hpp"
#include "sbp/radial.hpp"
#include "sbp/scenario.hpp"
#include "sbp/spectral.hpp"

namespace sbp {

struct ReductionConfig {
  int grid_n = 0;            // 0: use the scenario default
  double grid_L = 0;         // 0: use the scenario default
  double newton_tol = 0;     // dual norm of the bordered residual; 0: scenario
  double constraint_tol = 0; // orthogonality defect; 0: scenario
  int max_newton = 30;
  double lin_rtol = 1e-3;    // relative tolerance of each saddle solve
  int max_minres = 600;      // per linear solve
  double fd_step = 1e-3;     // xi offset for gradients and cross-checks
  bool polish_z = true;      // pin the ansatz to the discrete flat equation
};

// Converged corrector at one (eps, xi).  Fields live on `grid` (centered at
// xi); `tangents` are the family derivatives d z / d xi_i on the same grid.
struct ReductionState {
  double eps = 0;
  Vec3 xi{0, 0, 0};
  double lambda = 0;
  Grid3 grid;
  Field z;
  std::array<Field, 3> tangents;
  Field w;
  std::array<double, 3> alpha{0, 0, 0};
  double residual_dual_norm = 0;              // of E'(z+w) - sum alpha_i b_i
  std::array<double, 3> constraint_residuals{0, 0, 0};
  int newton_iters = 0;
  int minres_iters = 0;   // accumulated over the Newton loop
  bool converged = false;
};

// Split of Phi = E(z + w) into exactly summing parts:
//   leading      discrete energy of z under the frozen coefficient lam^2
//   lambda_term  potential variation  1/2 int (V_eps - lam^2) z^2 + cross term
//   omega_term   quartic interaction  (eps^3/4) Q(z + w)
//   psi_term     everything quadratic or higher in w
struct DecompositionReport {
  double phi = 0;
  double leading = 0;
  double lambda_term = 0;
  double omega_term = 0;
  double psi_term = 0;
  double identity_defect = 0;   // |phi - sum| / max(1, |phi|)
  double c0_vtheta = 0;         // continuum reference  C0 V(eps xi)^theta
  double nehari_defect = 0;     // discrete Nehari identity of z, relative
  double w_norm_h1 = 0;
};

// Gradient of Phi by both routes plus the correction-only gradient used by
// the expansion studies (finite differences of lambda_term+omega_term+psi_term).
struct GradientResult {
  Vec3 fd{0, 0, 0};            // central differences of Phi, recentered grids
  Vec3 pairing{0, 0, 0};       // <E'(z+w), zdot_i + wdot_i>
  Vec3 fd_remainder{0, 0, 0};  // central differences of Phi - leading
  double discrepancy = 0;      // max_i |fd_i - pairing_i|
};

class Reducer {
 public:
  Reducer(const Scenario& sc, const RadialProfile& prof, ReductionConfig cfg = {});
  ~Reducer();
  Reducer(const Reducer&) = delete;
  Reducer& operator=(const Reducer&) = delete;

  const Scenario& scenario() const { return sc_; }
  const RadialProfile& profile() const { return prof_; }
  const GroundConstants& constants() const { return gc_; }
  const ReductionConfig& config() const { return cfg_; }
  Spectral& spectral() { return *sp_; }

  Grid3 grid_for(const Vec3& xi) const;           // same geometry, center xi
  double lambda_at(double eps, const Vec3& xi) const;  // V(eps xi)^{1/2}

  // Dilated ansatz on the grid centered at xi.  With polish the profile is
  // driven onto the discrete equation -Lap z + lam^2 z = |z|^{p-1} z by a
  // damped Newton iteration (possible because the center is a grid node), so
  // quantities built from z are stationary under resampling noise.
  Field make_z(double eps, const Vec3& xi, bool polish);
  Field make_z(double eps, const Vec3& xi) { return make_z(eps, xi, cfg_.polish_z); }

  // Raw ansatz samples on an arbitrary grid (no polish; used by cross-checks
  // that move xi while keeping the grid fixed).
  Field sample_ansatz(double eps, const Vec3& xi, const Grid3& g) const;

  // Family derivatives d z/d xi_i = dlam_i * (d z/d lam) - d z/d x_i on the
  // recentered grid: the dilation factor from the chain rule through
  // lam(eps xi), the translation term as the spectral derivative of z.  Both
  // pieces differentiate the same family the solver actually uses: the
  // spectral derivative is exact for array translation, and d z/d lam comes
  // from central differences of the relaxed profiles (the analytic formula
  // a lam^{a-1} U + lam^a r U' is off by the discretization shift, which is
  // pointwise large on working grids).
  std::array<Field, 3> make_tangents(double eps, const Vec3& xi, const Field& z);

  // Dual norm of the full Euler-Lagrange residual at the bare ansatz (w = 0).
  double pseudo_residual_norm(double eps, const Vec3& xi);

  ReductionState solve_auxiliary(double eps, const Vec3& xi);
  ReductionState solve_auxiliary(double eps, const Vec3& xi,
                                 const ReductionState* warm);

  // Smallest Rayleigh quotient <H x, x> / ||x||_{H1}^2 of the second
  // variation at z + w over random localized probes projected off
  // span{z, zdot_1..3}; positive values certify coercivity on the probe set.
  double coercivity_check(const ReductionState& st, int n_probe, uint64_t seed);

  DecompositionReport reduced_phi(const ReductionState& st);

  // Two-route gradient at the state's xi; runs six warm-started corrector
  // solves at xi +- fd_step e_i.
  GradientResult reduced_grad(const ReductionState& center);

 private:
  struct Work;
  Field polished_profile(double lam);   // center-independent array, memoized
  Scenario sc_;
  RadialProfile prof_;
  GroundConstants gc_;
  ReductionConfig cfg_;
  int n_ = 0;
  double L_ = 0;
  std::unique_ptr<Spectral> sp_;
  std::unique_ptr<Work> work_;
};

}  // namespace sbp
