// Fourier-space operators: plane-wave identities, convolution oracles,
// multiplier quadrature cross-checks.
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "sbp/grid.hpp"
#include "sbp/spectral.hpp"
#include "sbp/util.hpp"

using namespace sbp;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Simpson quadrature of f on [a, b] with an even interval count.
double simpson(const std::function<double(double)>& f, double a, double b, int m) {
  const double h = (b - a) / m;
  double acc = f(a) + f(b);
  for (int i = 1; i < m; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Potential of a radial source rho(|x|) under the untruncated kernel
// (1 - e^{-eps t})/(eps t), reduced to one dimension:
//   phi(r) = (2 pi / r) int_0^inf r' rho(r') [G(r + r') - G(|r - r'|)] dr',
//   G(T)   = int_0^T t k(t) dt = T/eps + (e^{-eps T} - 1)/eps^2.
double bp_radial_reference(const std::function<double(double)>& rho, double eps,
                           double r, double rmax = 9.0, int m = 6000) {
  auto G = [eps](double T) { return T / eps + (std::exp(-eps * T) - 1.0) / (eps * eps); };
  if (r < 1e-12)
    return 4.0 * kPi * simpson(
        [&](double t) { return t * t * rho(t) * Spectral::bp_kernel(t, eps); },
        0.0, rmax, m);
  return 2.0 * kPi / r * simpson(
      [&](double t) { return t * rho(t) * (G(r + t) - G(std::fabs(r - t))); },
      0.0, rmax, m);
}

}  // namespace

TEST_CASE("plane-wave identities pin the transform conventions") {
  const int n = 32;
  const double L = 6.0;
  Grid3 g{n, L, {0, 0, 0}};
  Spectral sp(n, L);
  const double k1 = kPi / L * 3.0;  // an exactly representable mode
  Field u = sample_pointwise(g, [&](const Vec3& x) { return std::cos(k1 * x[0]); });
  const double vol = 8.0 * L * L * L;

  CHECK(sp.integral(u) == doctest::Approx(0.0).epsilon(0).scale(1e-10));
  CHECK(sp.inner_l2(u, u) == doctest::Approx(vol / 2).epsilon(1e-12));
  CHECK(sp.grad_inner(u, u) == doctest::Approx(k1 * k1 * vol / 2).epsilon(1e-12));
  CHECK(sp.norm_h1_sq(u) == doctest::Approx((1 + k1 * k1) * vol / 2).epsilon(1e-12));
  CHECK(sp.dual_norm_h1(u) ==
        doctest::Approx(std::sqrt(vol / 2 / (1 + k1 * k1))).epsilon(1e-12));

  Field out;
  sp.laplacian(u, out);
  double err = 0;
  for (size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::fabs(out[i] + k1 * k1 * u[i]));
  CHECK(err < 1e-10);

  sp.h1_apply(u, out);
  err = 0;
  for (size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::fabs(out[i] - (1 + k1 * k1) * u[i]));
  CHECK(err < 1e-10);

  sp.partial(u, 0, out);
  err = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        err = std::max(err, std::fabs(out[g.idx(ix, iy, iz)] +
                                      k1 * std::sin(k1 * g.coord(0, ix))));
  CHECK(err < 1e-10);
  sp.partial(u, 1, out);
  CHECK(field_max_abs(out) < 1e-10);

  sp.helmholtz_inverse(u, 2.5, out);
  err = 0;
  for (size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::fabs(out[i] - u[i] / (k1 * k1 + 2.5)));
  CHECK(err < 1e-12);

  // the square-root factors compose to the full inverse
  Field half, full;
  sp.helmholtz_sqrt(u, 2.5, -1, half);
  sp.helmholtz_sqrt(half, 2.5, -1, full);
  err = 0;
  for (size_t i = 0; i < u.size(); ++i)
    err = std::max(err, std::fabs(full[i] - u[i] / (k1 * k1 + 2.5)));
  CHECK(err < 1e-12);
  sp.helmholtz_sqrt(half, 2.5, +1, full);  // round-trip
  err = 0;
  for (size_t i = 0; i < u.size(); ++i) err = std::max(err, std::fabs(full[i] - u[i]));
  CHECK(err < 1e-11);
}

TEST_CASE("grid quadrature integrates a Gaussian to spectral accuracy") {
  Grid3 g{32, 6.0, {0, 0, 0}};
  Spectral sp(32, 6.0);
  const double s = 0.8;
  Field f = sample_radial(g, {0, 0, 0},
                          [&](double r) { return std::exp(-r * r / (2 * s * s)); });
  const double want = std::pow(2 * kPi, 1.5) * s * s * s;
  CHECK(sp.integral(f) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("weighted H1 pairing splits into gradient and weighted mass") {
  Grid3 g{24, 5.0, {0, 0, 0}};
  Spectral sp(24, 5.0);
  Field u = sample_pointwise(g, [](const Vec3& x) {
    return std::exp(-dot(x, x)) * (1.0 + 0.3 * x[0]);
  });
  Field w = sample_pointwise(g, [](const Vec3& x) {
    return std::exp(-0.7 * dot(x, x)) * (1.0 - 0.2 * x[2]);
  });
  Field f = sample_pointwise(g, [](const Vec3& x) { return 1.0 + 0.5 * x[1] * x[1]; });
  Field fw(w.size());
  for (size_t i = 0; i < w.size(); ++i) fw[i] = f[i] * w[i];
  const double split = sp.grad_inner(u, w) + sp.inner_l2(u, fw);
  CHECK(sp.inner_h1_weighted(u, w, f) == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("Coulomb convolution of a Gaussian matches the erf closed form") {
  const int n = 48;
  const double L = 8.0;
  Grid3 g{n, L, {0, 0, 0}};
  Spectral sp(n, L);
  const double s = 0.8;
  Field f = sample_radial(g, {0, 0, 0},
                          [&](double r) { return std::exp(-r * r / (2 * s * s)); });
  Field phi;
  sp.convolve_coulomb(f, phi);
  const double M = std::pow(2 * kPi, 1.5) * s * s * s;
  for (int off : {1, 3, 6, 9}) {
    const double r = g.coord(0, n / 2 + off);
    const double want = M * std::erf(r / (s * std::sqrt(2.0))) / r;
    const double got = phi[g.idx(n / 2 + off, n / 2, n / 2)];
    CHECK(std::fabs(got - want) < 2e-4 * want);
  }
}

TEST_CASE("fourth-order-field convolution matches 1D radial quadrature") {
  const int n = 48;
  const double L = 8.0;
  Grid3 g{n, L, {0, 0, 0}};
  Spectral sp(n, L);
  const double s = 0.8;
  auto rho = [&](double r) { return std::exp(-r * r / (2 * s * s)); };
  Field f = sample_radial(g, {0, 0, 0}, rho);
  for (double eps : {1.0, 0.3}) {
    Field phi;
    sp.convolve_bp(f, eps, phi);
    for (int off : {0, 2, 5, 8}) {
      const double r = g.coord(0, n / 2 + off);
      const double want = bp_radial_reference(rho, eps, std::fabs(r));
      const double got = phi[g.idx(n / 2 + off, n / 2, n / 2)];
      CHECK(std::fabs(got - want) < 2e-4 * std::fabs(want));
    }
  }
}

TEST_CASE("truncated-kernel multipliers agree with direct quadrature") {
  const double R = 12.0;
  for (double eps : {1.0, 0.25}) {
    for (double k : {0.3, 1.0, 2.7}) {
      const double direct = 4.0 * kPi / k * simpson(
          [&](double r) { return std::sin(k * r) * Spectral::bp_kernel(r, eps) * r; },
          0.0, R, 24000);
      CHECK(Spectral::bp_multiplier(k, eps, R) ==
            doctest::Approx(direct).epsilon(1e-9));
    }
    // zero mode: plain volume integral of the kernel ball
    const double zero = 4.0 * kPi * simpson(
        [&](double r) { return r * r * Spectral::bp_kernel(r, eps); }, 0.0, R, 24000);
    CHECK(Spectral::bp_multiplier(0.0, eps, R) == doctest::Approx(zero).epsilon(1e-9));
  }
  for (double k : {0.3, 1.0, 2.7})
    CHECK(Spectral::coulomb_multiplier(k, R) ==
          doctest::Approx(4.0 * kPi * (1.0 - std::cos(k * R)) / (k * k)).epsilon(1e-12));
  CHECK(Spectral::coulomb_multiplier(0.0, R) ==
        doctest::Approx(2.0 * kPi * R * R).epsilon(1e-12));
}

TEST_CASE("kernel and symbol limits") {
  // continuity at the origin and Coulomb comparison
  CHECK(Spectral::bp_kernel(1e-12, 2.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(Spectral::bp_kernel(0.5, 1.0) < 1.0);
  CHECK(Spectral::bp_kernel(3.0, 1.0) < Spectral::bp_kernel(1.0, 1.0));
  // large rate: kernel approaches scaled Coulomb away from the origin
  CHECK(Spectral::bp_kernel(2.0, 50.0) == doctest::Approx(1.0 / 100.0).epsilon(1e-6));
  for (double k : {0.4, 1.3}) {
    const double e = 0.7;
    CHECK(Spectral::bp_symbol(k, e) ==
          doctest::Approx(Spectral::coulomb_symbol(k) * e / (k * k + e * e)).epsilon(1e-13));
  }
}

TEST_CASE("convolution is translation equivariant on grid shifts") {
  const int n = 32;
  const double L = 6.0;
  Grid3 g{n, L, {0, 0, 0}};
  Spectral sp(n, L);
  Field a = sample_radial(g, {0, 0, 0}, [](double r) { return std::exp(-2 * r * r); });
  const int sx = 3, sy = -2;
  Field b = sample_radial(g, {sx * g.h(), sy * g.h(), 0},
                          [](double r) { return std::exp(-2 * r * r); });
  Field pa, pb;
  sp.convolve_bp(a, 0.8, pa);
  sp.convolve_bp(b, 0.8, pb);
  // compare pb against pa shifted by (sx, sy) where both nodes exist
  double err = 0, ref = 0;
  for (int ix = 8; ix < n - 8; ++ix)
    for (int iy = 8; iy < n - 8; ++iy)
      for (int iz = 8; iz < n - 8; ++iz) {
        err = std::max(err, std::fabs(pb[g.idx(ix, iy, iz)] -
                                      pa[g.idx(ix - sx, iy - sy, iz)]));
        ref = std::max(ref, std::fabs(pa[g.idx(ix, iy, iz)]));
      }
  CHECK(err < 1e-10 * ref);
}
