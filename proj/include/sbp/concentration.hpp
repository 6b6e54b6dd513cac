// Critical points of the reduced energy and the full solutions they carry.
//
// The reduced landscape from the auxiliary solver is searched with a damped
// Newton iteration whose Jacobian comes from the closed-form force-field
// model (exact enough near the well for superlinear convergence, and free).
// Converged points are re-certified at the PDE level: the full, unprojected
// Euler-Lagrange residual of u = z + w must be small, not just the reduced
// gradient.  Studies then track the blow-down images eps * xi_star across an
// eps sweep and fit their approach to the expected concentration point.
#pragma once

#include <string>
#include <vector>

#include "sbp/asymptotics.hpp"
#include "sbp/reduction.hpp"

namespace sbp {

// One verified full solution at a single eps.
struct ConcentrationRecord {
  double eps = 0;
  Vec3 xi_star{0, 0, 0};
  double full_residual_dual_norm = 0;  // ||E'(z + w)||_{H^-1}, unprojected
  double w_norm_h1 = 0;
  double distance_to_expected = 0;  // |eps * xi_star - x0|
  double phi_value = 0;
  double reduced_grad_norm = 0;
  double grad_v_at_point = 0;  // |grad V(eps xi_star)|
  int local_index = 0;         // sign det d(grad Phi) from the model Jacobian
  int newton_iters = 0;
  bool converged = false;
};

// Newton search outcome; state holds the converged auxiliary solve at xi.
struct CriticalPoint {
  Vec3 xi{0, 0, 0};
  ReductionState state;
  Vec3 grad{0, 0, 0};  // reduced gradient at xi (central differences)
  double grad_norm = 0;
  int local_index = 0;
  int iters = 0;
  bool converged = false;
  bool left_ball = false;
  std::string message;
};

struct ConcentrationOptions {
  double gtol = 1e-7;          // reduced-gradient norm target
  double radius = 3.0;         // Newton confined to |xi - guess| <= radius
  int max_iter = 25;
  double damping = 0.0;        // Levenberg shift, relative to |J|; 0 = auto
  double residual_tol = 1e-6;  // full-solution certificate
};

// Damped Newton on the reduced gradient from the given guess (absolute
// blow-up coordinates).  The model Jacobian is regularized by a Levenberg
// shift so ring scenarios (flat direction along the critical circle) still
// step sanely; steps are clipped to stay inside the search ball, and the
// search reports rather than throws when it escapes.
CriticalPoint find_critical_xi(Reducer& red, double eps, const Vec3& guess,
                               const ConcentrationOptions& opt = {},
                               const ReductionState* warm = nullptr);

// Assemble and certify the full solution at a converged critical point.
// Throws NumericFailure if the reduced gradient passed but the full residual
// does not (natural-constraint violation).
ConcentrationRecord full_solution(Reducer& red, const CriticalPoint& cp,
                                  const ConcentrationOptions& opt = {});

// Per-eps records plus fitted orders.  Starts each search at the blow-up
// image of `start` (default: the scenario's x0) and warm-starts down the
// sweep.  Records measure distance against `start` itself, so a study
// launched from a non-critical point cannot certify it.  distance_fit:
// log |eps xi* - start| vs log eps; w_fit: log ||w||_H1 vs log eps.
struct ConcentrationStudy {
  Vec3 start{0, 0, 0};
  std::vector<ConcentrationRecord> records;
  LineFit distance_fit{};
  LineFit w_fit{};
  bool distance_fit_ok = false;
  bool w_fit_ok = false;
  bool all_converged = false;
  bool all_certified = false;   // every record passed the residual gate
  bool accumulation_ok = false; // |grad V| < 1e-3 at eps xi* of the finest eps
  // corrector state at the finest converged eps, kept for field snapshots
  ReductionState final_state;
  Vec3 final_xi{0, 0, 0};
  bool has_final_state = false;
};

ConcentrationStudy concentration_study(Reducer& red,
                                       std::vector<double> sweep = {},
                                       const Vec3* start = nullptr,
                                       const ConcentrationOptions& opt = {});

// Scan Phi over a polar annulus around the scenario's expected set (the
// circle |x'| = |x0| for ring scenarios, a disc around x0 otherwise), then
// Newton-polish the local extrema of the scan table and cluster the verified
// critical points by distance.
struct MultiplicityScan {
  double eps = 0;
  std::vector<Vec3> scan_xi;       // row-major n_radial x n_angular
  std::vector<double> scan_phi;
  std::vector<CriticalPoint> candidates;  // polished, converged, certified
  std::vector<ConcentrationRecord> distinct;  // clustered representatives
};

MultiplicityScan multiplicity_scan(Reducer& red, double eps,
                                   int n_radial = 32, int n_angular = 32,
                                   double half_width = 2.0,
                                   const ConcentrationOptions& opt = {});

}  // namespace sbp
