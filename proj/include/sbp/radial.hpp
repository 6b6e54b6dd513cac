// Radial ground state of  -U'' - (2/r) U' + U = U^p  on (0,inf),
// U'(0) = 0, U > 0, U -> 0.  Shooting (two independent steppers) finds U(0);
// a banded collocation Newton pass then pins the stored profile to the
// discrete equation so the pointwise residual is solver-tolerance limited.
#pragma once

#include <array>
#include <string>
#include <vector>

namespace sbp {

// Integral constants of the profile (all over R^3, unit dilation):
//   l2sq     = ||U||_L2^2,     grad_sq = ||grad U||_L2^2,
//   lp1      = ||U||_{p+1}^{p+1},
//   c0       = (1/2 - 1/(p+1)) lp1,
//   theta    = (p+1)/(p-1) - 3/2,
//   moment_a[alpha] = int x_j^alpha U(x)^2 dx   (any axis j; 0 for odd alpha),
//   moment_b[beta]  = int x_i^beta U d_iU dx    (axis i = moment axis; 0 for even beta).
struct GroundConstants {
  double p = 0;
  double u0 = 0;
  double l2sq = 0;
  double grad_sq = 0;
  double h1sq = 0;
  double lp1 = 0;
  double c0 = 0;
  double theta = 0;
  std::array<double, 5> moment_a{};
  std::array<double, 5> moment_b{};
};

class RadialProfile {
 public:
  double p = 3.0;
  double u0 = 0.0;      // U(0)
  double r_max = 30.0;  // uniform grid extent; analytic e^{-r}/r tail beyond
  double h = 0.0;       // node spacing
  double tol = 0.0;     // shooting bisection width achieved on U(0)
  double tail_c = 0.0;  // U ~ tail_c exp(-r)/r for r > r_max

  std::vector<double> r, u, du;

  double value(double rr) const;  // cubic Hermite inside, analytic tail outside
  double deriv(double rr) const;
};

// Full pipeline: bisection shooting (RKF45), dense pass, collocation polish.
// Throws InvalidModel for p outside (1,5), NumericFailure if iteration stalls.
RadialProfile solve_ground_state(double p, double tol = 1e-13, double r_max = 30.0);

// U(0) from a single stepper (0 = RKF45, 1 = RK8PD), for cross-validation.
double shoot_u0(double p, int method, double tol = 1e-13);

GroundConstants ground_constants(const RadialProfile& prof);

// Max-norm residual of the stored profile in the collocation system it was
// polished against (decay-closure ghosts included).
double ode_residual_max(const RadialProfile& prof);

// Dilated family U_lam(x) = lam^{2/(p-1)} U(lam x).
double dilated_value(const RadialProfile& prof, double lam, double rr);
double dilated_deriv(const RadialProfile& prof, double lam, double rr);

// Plain-text exchange: '#'-prefixed header (p, u0, r_max, tol, tail), then
// "r u" rows at %.17g.
void save_profile(const RadialProfile& prof, const std::string& path);
RadialProfile load_profile(const std::string& path);

}  // namespace sbp
