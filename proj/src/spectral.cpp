#include "sbp/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

#include "sbp/util.hpp"

namespace sbp {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

inline double ring_index(int i, int n) { return i <= n / 2 ? i : i - n; }

}  // namespace

struct Spectral::Impl {
  int n;
  double L, h;
  int64_t npts, ncplx;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_complex* cbuf2 = nullptr;
  fftw_plan fwd = nullptr, inv = nullptr;
  std::vector<double> k2;     // |k|^2 on the r2c half-grid
  std::vector<double> wherm;  // Hermitian expansion weight (1 or 2)

  // 2x padded workspace for free-space convolutions (lazy)
  int np = 0;
  int64_t npts_p = 0, ncplx_p = 0;
  double* rbuf_p = nullptr;
  fftw_complex* cbuf_p = nullptr;
  fftw_plan fwd_p = nullptr, inv_p = nullptr;
  std::vector<double> kmag_p;
  // multiplier tables keyed by (kernel id, eps bit pattern)
  std::map<std::pair<int, uint64_t>, std::vector<double>> mult_cache;

  void ensure_pad() {
    if (rbuf_p) return;
    np = 2 * n;
    npts_p = static_cast<int64_t>(np) * np * np;
    ncplx_p = static_cast<int64_t>(np) * np * (np / 2 + 1);
    rbuf_p = fftw_alloc_real(npts_p);
    cbuf_p = fftw_alloc_complex(ncplx_p);
    {
      std::lock_guard<std::mutex> lock(plan_mutex());
      fwd_p = fftw_plan_dft_r2c_3d(np, np, np, rbuf_p, cbuf_p, FFTW_ESTIMATE);
      inv_p = fftw_plan_dft_c2r_3d(np, np, np, cbuf_p, rbuf_p, FFTW_ESTIMATE);
    }
    kmag_p.resize(ncplx_p);
    const double dk = M_PI / (2.0 * L);  // padded box has period 4L
    int64_t m = 0;
    for (int ix = 0; ix < np; ++ix) {
      const double kx = dk * ring_index(ix, np);
      for (int iy = 0; iy < np; ++iy) {
        const double ky = dk * ring_index(iy, np);
        for (int iz = 0; iz <= np / 2; ++iz, ++m) {
          const double kz = dk * iz;
          kmag_p[m] = std::sqrt(kx * kx + ky * ky + kz * kz);
        }
      }
    }
  }

  const std::vector<double>& multiplier(int kernel, double eps) {
    ensure_pad();
    uint64_t bits = 0;
    std::memcpy(&bits, &eps, sizeof bits);
    auto key = std::make_pair(kernel, bits);
    auto it = mult_cache.find(key);
    if (it != mult_cache.end()) return it->second;
    const double R = 2.0 * L;
    std::vector<double> tab(ncplx_p);
    for (int64_t m = 0; m < ncplx_p; ++m)
      tab[m] = kernel == 0 ? Spectral::bp_multiplier(kmag_p[m], eps, R)
                           : Spectral::coulomb_multiplier(kmag_p[m], R);
    return mult_cache.emplace(key, std::move(tab)).first->second;
  }
};

Spectral::Spectral(int n, double L) : impl_(new Impl), n_(n), L_(L) {
  if (n < 4 || n % 2 != 0) throw InvalidModel("spectral grid needs even n >= 4");
  if (!(L > 0)) throw InvalidModel("spectral grid needs L > 0");
  Impl& im = *impl_;
  im.n = n;
  im.L = L;
  im.h = 2.0 * L / n;
  im.npts = static_cast<int64_t>(n) * n * n;
  im.ncplx = static_cast<int64_t>(n) * n * (n / 2 + 1);
  im.rbuf = fftw_alloc_real(im.npts);
  im.cbuf = fftw_alloc_complex(im.ncplx);
  im.cbuf2 = fftw_alloc_complex(im.ncplx);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    im.fwd = fftw_plan_dft_r2c_3d(n, n, n, im.rbuf, im.cbuf, FFTW_ESTIMATE);
    im.inv = fftw_plan_dft_c2r_3d(n, n, n, im.cbuf, im.rbuf, FFTW_ESTIMATE);
  }
  im.k2.resize(im.ncplx);
  im.wherm.resize(im.ncplx);
  const double dk = M_PI / L;
  int64_t m = 0;
  for (int ix = 0; ix < n; ++ix) {
    const double kx = dk * ring_index(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = dk * ring_index(iy, n);
      for (int iz = 0; iz <= n / 2; ++iz, ++m) {
        const double kz = dk * iz;
        im.k2[m] = kx * kx + ky * ky + kz * kz;
        im.wherm[m] = (iz == 0 || iz == n / 2) ? 1.0 : 2.0;
      }
    }
  }
}

Spectral::~Spectral() {
  Impl& im = *impl_;
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (im.fwd) fftw_destroy_plan(im.fwd);
  if (im.inv) fftw_destroy_plan(im.inv);
  if (im.fwd_p) fftw_destroy_plan(im.fwd_p);
  if (im.inv_p) fftw_destroy_plan(im.inv_p);
  fftw_free(im.rbuf);
  fftw_free(im.cbuf);
  fftw_free(im.cbuf2);
  if (im.rbuf_p) fftw_free(im.rbuf_p);
  if (im.cbuf_p) fftw_free(im.cbuf_p);
}

double Spectral::integral(const Field& u) const {
  double s = 0;
  for (double v : u) s += v;
  return s * impl_->h * impl_->h * impl_->h;
}

double Spectral::inner_l2(const Field& u, const Field& w) const {
  double s = 0;
  for (size_t i = 0; i < u.size(); ++i) s += u[i] * w[i];
  return s * impl_->h * impl_->h * impl_->h;
}

double Spectral::grad_inner(const Field& u, const Field& w) {
  Impl& im = *impl_;
  if (static_cast<int64_t>(u.size()) != im.npts || u.size() != w.size())
    throw std::invalid_argument("grad_inner: field size mismatch");
  std::memcpy(im.rbuf, u.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  std::memcpy(im.cbuf2, im.cbuf, sizeof(fftw_complex) * im.ncplx);
  std::memcpy(im.rbuf, w.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  double s = 0;
  for (int64_t m = 0; m < im.ncplx; ++m) {
    const double re = im.cbuf[m][0] * im.cbuf2[m][0] + im.cbuf[m][1] * im.cbuf2[m][1];
    s += im.wherm[m] * im.k2[m] * re;
  }
  const double h3 = im.h * im.h * im.h;
  return s * h3 / static_cast<double>(im.npts);
}

double Spectral::norm_h1_sq(const Field& u) {
  Impl& im = *impl_;
  std::memcpy(im.rbuf, u.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  double s = 0;
  for (int64_t m = 0; m < im.ncplx; ++m) {
    const double a = im.cbuf[m][0] * im.cbuf[m][0] + im.cbuf[m][1] * im.cbuf[m][1];
    s += im.wherm[m] * (im.k2[m] + 1.0) * a;
  }
  const double h3 = im.h * im.h * im.h;
  return s * h3 / static_cast<double>(im.npts);
}

double Spectral::inner_h1_weighted(const Field& u, const Field& w, const Field& f) {
  double s = 0;
  for (size_t i = 0; i < u.size(); ++i) s += f[i] * u[i] * w[i];
  const double h3 = impl_->h * impl_->h * impl_->h;
  return grad_inner(u, w) + s * h3;
}

double Spectral::dual_norm_h1(const Field& r) {
  Impl& im = *impl_;
  std::memcpy(im.rbuf, r.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  double s = 0;
  for (int64_t m = 0; m < im.ncplx; ++m) {
    const double a = im.cbuf[m][0] * im.cbuf[m][0] + im.cbuf[m][1] * im.cbuf[m][1];
    s += im.wherm[m] * a / (im.k2[m] + 1.0);
  }
  const double h3 = im.h * im.h * im.h;
  return std::sqrt(s * h3 / static_cast<double>(im.npts));
}

namespace {
// shared symbol-apply pattern: out = ifft( f(k2) * fft(u) )
template <class Fn>
void apply_symbol(Spectral::Impl& im, const Field& u, Field& out, Fn&& f) {
  std::memcpy(im.rbuf, u.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  const double inv_n = 1.0 / static_cast<double>(im.npts);
  for (int64_t m = 0; m < im.ncplx; ++m) {
    const double g = f(im.k2[m]) * inv_n;
    im.cbuf[m][0] *= g;
    im.cbuf[m][1] *= g;
  }
  fftw_execute(im.inv);
  out.assign(im.rbuf, im.rbuf + im.npts);
}
}  // namespace

void Spectral::laplacian(const Field& u, Field& out) {
  apply_symbol(*impl_, u, out, [](double k2) { return -k2; });
}

void Spectral::h1_apply(const Field& u, Field& out) {
  apply_symbol(*impl_, u, out, [](double k2) { return k2 + 1.0; });
}

void Spectral::partial(const Field& u, int axis, Field& out) {
  Impl& im = *impl_;
  if (axis < 0 || axis > 2) throw std::invalid_argument("partial: axis must be 0..2");
  std::memcpy(im.rbuf, u.data(), sizeof(double) * im.npts);
  fftw_execute(im.fwd);
  const double dk = M_PI / im.L;
  const double inv_n = 1.0 / static_cast<double>(im.npts);
  const int n = im.n;
  int64_t m = 0;
  for (int ix = 0; ix < n; ++ix) {
    // the Nyquist plane carries no odd-symbol derivative information
    const double jx = ix == n / 2 ? 0.0 : ring_index(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double jy = iy == n / 2 ? 0.0 : ring_index(iy, n);
      for (int iz = 0; iz <= n / 2; ++iz, ++m) {
        const double jz = iz == n / 2 ? 0.0 : iz;
        const double k = dk * (axis == 0 ? jx : axis == 1 ? jy : jz);
        const double re = im.cbuf[m][0], imz = im.cbuf[m][1];
        im.cbuf[m][0] = -k * imz * inv_n;
        im.cbuf[m][1] = k * re * inv_n;
      }
    }
  }
  fftw_execute(im.inv);
  out.assign(im.rbuf, im.rbuf + im.npts);
}

void Spectral::helmholtz_inverse(const Field& rhs, double c, Field& out) {
  if (!(c > 0)) throw std::invalid_argument("helmholtz_inverse needs c > 0");
  apply_symbol(*impl_, rhs, out, [c](double k2) { return 1.0 / (k2 + c); });
}

void Spectral::helmholtz_sqrt(const Field& u, double c, int sign, Field& out) {
  if (!(c > 0)) throw std::invalid_argument("helmholtz_sqrt needs c > 0");
  if (sign >= 0)
    apply_symbol(*impl_, u, out, [c](double k2) { return std::sqrt(k2 + c); });
  else
    apply_symbol(*impl_, u, out, [c](double k2) { return 1.0 / std::sqrt(k2 + c); });
}

namespace {
void convolve_padded(Spectral::Impl& im, const Field& src,
                     const std::vector<double>& mult, Field& out) {
  const int n = im.n, np = im.np, o = im.n / 2;
  std::memset(im.rbuf_p, 0, sizeof(double) * im.npts_p);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const double* srow = src.data() + (static_cast<int64_t>(ix) * n + iy) * n;
      double* drow = im.rbuf_p +
          ((static_cast<int64_t>(ix + o) * np + (iy + o)) * np + o);
      std::memcpy(drow, srow, sizeof(double) * n);
    }
  fftw_execute(im.fwd_p);
  const double scale = 1.0 / static_cast<double>(im.npts_p);
  for (int64_t m = 0; m < im.ncplx_p; ++m) {
    const double g = mult[m] * scale;
    im.cbuf_p[m][0] *= g;
    im.cbuf_p[m][1] *= g;
  }
  fftw_execute(im.inv_p);
  out.resize(static_cast<int64_t>(n) * n * n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      double* drow = out.data() + (static_cast<int64_t>(ix) * n + iy) * n;
      const double* srow = im.rbuf_p +
          ((static_cast<int64_t>(ix + o) * np + (iy + o)) * np + o);
      std::memcpy(drow, srow, sizeof(double) * n);
    }
}
}  // namespace

void Spectral::convolve_bp(const Field& src, double eps, Field& out) {
  if (!(eps > 0)) throw std::invalid_argument("convolve_bp needs eps > 0");
  Impl& im = *impl_;
  const auto& mult = im.multiplier(0, eps);
  convolve_padded(im, src, mult, out);
}

void Spectral::convolve_coulomb(const Field& src, Field& out) {
  Impl& im = *impl_;
  const auto& mult = im.multiplier(1, 0.0);
  convolve_padded(im, src, mult, out);
}

// int_{|x|<R} (1-e^{-eps r})/(eps r) e^{-ikx} dx.  The k -> 0 limit is finite;
// 1-cos is evaluated as 2 sin^2 to avoid cancellation.
double Spectral::bp_multiplier(double k, double eps, double R) {
  const double fourpi = 4.0 * M_PI;
  if (k < 1e-9) {
    const double em = std::exp(-eps * R);
    return fourpi / eps * (0.5 * R * R - (1.0 - (1.0 + eps * R) * em) / (eps * eps));
  }
  const double s = std::sin(k * R), c = std::cos(k * R);
  const double one_m_cos = 2.0 * sqr(std::sin(0.5 * k * R));
  const double em = std::exp(-eps * R);
  return fourpi / (eps * k) *
         (one_m_cos / k - (k - em * (k * c + eps * s)) / (k * k + eps * eps));
}

// int_{|x|<R} e^{-ikx}/|x| dx = 4 pi (1 - cos kR)/k^2, with its finite k -> 0
// limit 2 pi R^2 (the truncated kernel is integrable, no zero-mode convention).
double Spectral::coulomb_multiplier(double k, double R) {
  if (k < 1e-9) return 2.0 * M_PI * R * R;  // limit of the truncated kernel
  return 4.0 * M_PI * 2.0 * sqr(std::sin(0.5 * k * R)) / (k * k);
}

double Spectral::bp_symbol(double k, double eps) {
  return 4.0 * M_PI * eps / (k * k * (k * k + eps * eps));
}

double Spectral::coulomb_symbol(double k) { return 4.0 * M_PI / (k * k); }

double Spectral::bp_kernel(double r, double eps) {
  const double s = eps * r;
  if (s < 1e-8) return 1.0 - 0.5 * s;
  return -std::expm1(-s) / s;
}

}  // namespace sbp
