// Fourier-space operators on the periodic box [-L, L)^3: Laplacian and
// Helmholtz inverses, H^1 pairings, dual norms, and free-space convolutions
// with the Bopp-Podolsky and Coulomb kernels via truncated-kernel multipliers
// on a 2x zero-padded grid (exact for sources and targets separated by less
// than 2L, which covers exponentially localized fields).
#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "sbp/grid.hpp"

namespace sbp {

class Spectral {
 public:
  Spectral(int n, double L);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  int n() const { return n_; }
  double L() const { return L_; }
  double h() const { return 2.0 * L_ / n_; }

  // quadrature on the grid (h^3-weighted sums)
  double integral(const Field& u) const;
  double inner_l2(const Field& u, const Field& w) const;

  // spectral pairings; one field argument is transformed per call
  double grad_inner(const Field& u, const Field& w);   // int grad u . grad w
  double norm_h1_sq(const Field& u);                   // grad + L2
  double dual_norm_h1(const Field& r);                 // || (-Lap+1)^{-1/2} r ||_L2
  // int grad u . grad w + int f u w  (weighted mass term by grid quadrature)
  double inner_h1_weighted(const Field& u, const Field& w, const Field& f);

  void laplacian(const Field& u, Field& out);          // Lap u
  void h1_apply(const Field& u, Field& out);           // (-Lap + 1) u
  void partial(const Field& u, int axis, Field& out);  // d u / dx_axis
  void helmholtz_inverse(const Field& rhs, double c, Field& out);  // (-Lap + c)^{-1}
  // (-Lap + c)^{+/-1/2} u, used by the projected eigenvalue probe
  void helmholtz_sqrt(const Field& u, double c, int sign, Field& out);

  // free-space convolutions (kernel truncated at R = 2L)
  void convolve_bp(const Field& src, double eps, Field& out);   // (1-e^{-eps r})/(eps r)
  void convolve_coulomb(const Field& src, Field& out);          // 1/r

  // analytic multipliers of the truncated kernels and the ideal symbols
  static double bp_multiplier(double k, double eps, double R);
  static double coulomb_multiplier(double k, double R);
  static double bp_symbol(double k, double eps);      // 4 pi eps / (k^2 (k^2+eps^2))
  static double coulomb_symbol(double k);             // 4 pi / k^2
  static double bp_kernel(double r, double eps);      // (1 - e^{-eps r})/(eps r)

  struct Impl;  // buffer/plan state, defined in the implementation file

 private:
  std::unique_ptr<Impl> impl_;
  int n_;
  double L_;
};

}  // namespace sbp
