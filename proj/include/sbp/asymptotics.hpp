#pragma once
// Small-eps expansion machinery for the reduced energy.
//
// Two kinds of study live here:
//
//  * run_fixed_point / fixed-point studies: hold a physical location x*
//    fixed, sweep eps with xi = x*/eps, and measure how fast the reduced
//    energy and its gradient collapse onto the leading channel (the
//    dilation energy of the polished soliton).  The remainders are taken
//    against the DISCRETE leading term produced by the decomposition, so
//    they measure the expansion itself and not grid bias.
//
//  * run_panel / panel studies: hold a blow-up offset xi fixed, sweep eps,
//    and compare the reduced gradient against closed-form force fields
//    built from moments of the ground profile.  Which force field applies
//    depends on the scenario regime:
//      - nondegenerate / ring: curvature_force (Hessian of V at the well
//        center contracted with xi),
//      - degenerate_v: force_from_v (pure-axis expansion of V at order
//        deg_n),
//      - degenerate_k / mixed: force_from_k (coupling channel at order
//        deg_m, entering at eps^(2m+3)) plus force_from_v when V also
//        degenerates.
//    The reduced gradient approaches MINUS eps^gamma times these fields;
//    predicted_grad bundles the sign and the eps powers.
//
// The moment bookkeeping uses GroundConstants::moment_a (even moments of
// U^2 along an axis) and moment_b (odd moments of U d_iU along the same
// axis).  pair_moment exposes the factorized two-point moment that the
// coupling channel contracts against; its parity structure (zero unless
// l == i, alpha even, beta odd) is what makes force_from_k separable.

#include <array>
#include <string>
#include <vector>

#include "sbp/grid.hpp"
#include "sbp/radial.hpp"
#include "sbp/reduction.hpp"
#include "sbp/scenario.hpp"
#include "sbp/util.hpp"

namespace sbp {

// A decay series value(eps) destined for a log-log fit.  eps_values must be
// strictly decreasing and positive; values are magnitudes (>= 0).
struct AsymptoticSeries {
  std::vector<double> eps_values;
  std::vector<double> values;
  std::string label;
};

// Least-squares fit of log(value) against log(eps).  Entries whose value is
// below 1e-14 are dropped (they sit at rounding level and would wreck the
// fit); at least four usable points must remain or NumericFailure is
// thrown.  Also throws if eps_values is not strictly decreasing.
LineFit fit_series(const AsymptoticSeries& s);

// ---------------------------------------------------------------------------
// closed-form force fields (blow-up coordinates, x = x0 + eps*xi)
// ---------------------------------------------------------------------------

// Quadratic-well force: (Hess V(x0) xi)_i * moment_b[1].  This is the
// eps^2 coefficient of the reduced gradient at a nondegenerate critical
// point of V.  moment_b[1] = -1/2 * l2sq by parts, so the field equals
// -1/2 |U|_L2^2 Hess V(x0) xi; both routes are exercised by tests.
Vec3 curvature_force(const Scenario& sc, const GroundConstants& gc,
                     const Vec3& xi);

// Pure-axis force of order n = sc.deg_n (V flat to order n-1 at x0):
//   f_i(xi) = (1/n!) d_i^n V(x0) * sum_{alpha odd} C(n,alpha)
//             xi_i^(n-alpha) moment_b[alpha].
// Reduces to curvature_force for n = 2 and a diagonal Hessian.  Requires
// 2 <= n <= 4 (moment tables go up to order 4).
Vec3 force_from_v(const Scenario& sc, const GroundConstants& gc,
                  const Vec3& xi);

// Coupling-channel force of order m = sc.deg_m (K vanishing to order m-1
// at x0), entering the gradient at eps^(2m+3):
//   g_i(xi) = (1/(m!)^2) d_i^m K(x0) B_i(xi) * sum_j d_j^m K(x0) A_j(xi),
//   A_j = sum_{alpha even} C(m,alpha) xi_j^(m-alpha) moment_a[alpha],
//   B_i = sum_{beta odd}  C(m,beta)  xi_i^(m-beta)  moment_b[beta].
// Requires 1 <= m <= 4.
Vec3 force_from_k(const Scenario& sc, const GroundConstants& gc,
                  const Vec3& xi);

// Factorized two-point moment contracted by the coupling channel:
//   pair_moment = int U^2(x) x_j^alpha dx * int U(y) d_iU(y) y_l^beta dy,
// which vanishes unless l == i, alpha is even and beta is odd; otherwise it
// equals moment_a[alpha] * moment_b[beta].  Indices alpha, beta in [0,4];
// i, j, l in {0,1,2}.  The 6D integral it stands for is checked against
// Monte-Carlo in the tests.
double pair_moment(const GroundConstants& gc, int alpha, int beta, int i,
                   int j, int l);

// Model prediction for the reduced gradient at offset xi:
//   flat          -> 0
//   nondegenerate -> -eps^2 curvature_force
//   ring          -> -eps^2 curvature_force
//   degenerate_v  -> -eps^n force_from_v
//   degenerate_k  -> -eps^(2m+3) force_from_k
//   mixed         -> -(eps^n force_from_v + eps^(2m+3) force_from_k)
Vec3 predicted_grad(const Scenario& sc, const GroundConstants& gc,
                    const Vec3& xi, double eps);

// Leading eps-order of |predicted_grad| for the scenario's regime
// (2, deg_n, 2*deg_m+3, or min(deg_n, 2*deg_m+3); 0 for flat).
double leading_order(const Scenario& sc);

// Force field carrying the leading order alone (used for coefficient
// ratio checks; for mixed scenarios this is the lower-order channel).
Vec3 leading_force(const Scenario& sc, const GroundConstants& gc,
                   const Vec3& xi);

// Central-difference Jacobian (step delta) of predicted_grad at fixed eps;
// used by the locator Newton iterations and by the kernel test of the
// coupling-channel Jacobian at the origin.
std::array<Vec3, 3> predicted_grad_jacobian(const Scenario& sc,
                                            const GroundConstants& gc,
                                            const Vec3& xi, double eps,
                                            double delta = 1e-2);

// ---------------------------------------------------------------------------
// sweep studies
// ---------------------------------------------------------------------------

// One solved point of an eps sweep.
struct SweepPoint {
  double eps = 0;
  Vec3 xi{};              // blow-up offset used for this solve
  Vec3 grad_fd{};         // reduced gradient, finite-difference route
  Vec3 grad_pair{};       // reduced gradient, residual-pairing route
  Vec3 grad_correction{}; // finite differences of phi minus its leading part
  double discrepancy = 0; // max component gap between the two routes
  double phi = 0;
  double leading = 0;
  double lambda_term = 0;
  double omega_term = 0;
  double psi_term = 0;
  double identity_defect = 0;
  double w_norm_h1 = 0;
  double residual_dual_norm = 0;
  int newton_iters = 0;
};

// Fixed blow-up offset, eps swept.  remainder holds
// |grad_fd - predicted_grad| per usable eps (usable: remainder above
// 10x the two-route discrepancy, the direct noise estimate for the
// gradient at that eps).  coeff_ratio compares the measured leading
// coefficient -grad_i/eps^gamma at the smallest usable eps against
// leading_force; components whose model value is below rel_floor times
// the largest one are reported as 0/0 -> quiet NaN and skipped by
// callers.
struct PanelStudy {
  Vec3 xi{};
  double gamma = 0;
  Vec3 model_force{};
  std::vector<SweepPoint> points;
  AsymptoticSeries remainder;
  LineFit remainder_fit{};   // valid only if fit_ok
  bool fit_ok = false;
  Vec3 coeff_ratio{};
  double coeff_eps = 0;      // eps at which the ratio was taken (0 if none)
};

// Fixed physical location x*, eps swept with xi = x*/eps.  The value
// remainder is |phi - leading| (leading from the same decomposition, so
// the pair is discretely consistent); the gradient remainder is
// |grad(phi) - grad(leading)| from the finite-difference route.
struct FixedPointStudy {
  Vec3 xstar{};
  std::vector<SweepPoint> points;
  AsymptoticSeries value_remainder;
  AsymptoticSeries grad_remainder;
  LineFit value_fit{};
  LineFit grad_fit{};
  bool fits_ok = false;
};

// xi is the offset from the blow-up image of x0: each solve runs at
// x0/eps + xi, so the same offset tracks the well across the sweep.
PanelStudy run_panel(Reducer& red, const Vec3& xi,
                     const std::vector<double>& sweep);

FixedPointStudy run_fixed_point(Reducer& red, const Vec3& xstar,
                                const std::vector<double>& sweep);

// Default offsets probing the scenario's force field away from its zeros
// (axis points plus one skew point; scaled into the well for ring
// scenarios).
std::vector<Vec3> default_panel(const Scenario& sc);

// Umbrella study: panels at the given offsets plus fixed-point sweeps.
// Empty panel_xis selects default_panel(sc); empty sweep selects the
// scenario sweep.
struct ExpansionReport {
  std::vector<PanelStudy> panels;
  std::vector<FixedPointStudy> fixed_points;
};

ExpansionReport expansion_study(Reducer& red, std::vector<Vec3> panel_xis,
                                const std::vector<Vec3>& fixed_xstars,
                                std::vector<double> sweep);

} // namespace sbp
