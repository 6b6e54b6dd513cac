#include "sbp/energy.hpp"

#include <cmath>

#include "sbp/util.hpp"

namespace sbp {

void signed_power(const Field& u, double p, Field& out) {
  out.resize(u.size());
  for (size_t i = 0; i < u.size(); ++i)
    out[i] = std::copysign(std::pow(std::fabs(u[i]), p), u[i]);
}

void power_deriv(const Field& u, double p, Field& out) {
  out.resize(u.size());
  for (size_t i = 0; i < u.size(); ++i)
    out[i] = p * std::pow(std::fabs(u[i]), p - 1.0);
}

EnergyModel::EnergyModel(const Scenario& sc, double eps, const Grid3& grid, Spectral& sp)
    : sc_(&sc), eps_(eps), p_(sc.p), grid_(grid), sp_(&sp) {
  if (sp.n() != grid.n || sp.L() != grid.L)
    throw InvalidModel("energy model: spectral workspace does not match grid");
  if (!(eps > 0)) throw InvalidModel("energy model: eps must be positive");
  veps_ = sample_pointwise(grid, [&](const Vec3& x) { return sc.V.value(eps * x); });
  has_k_ = !sc.K.is_zero();
  if (has_k_)
    keps_ = sample_pointwise(grid, [&](const Vec3& x) { return sc.K.value(eps * x); });
}

void EnergyModel::bp_potential(const Field& f, Field& out) {
  Field src(f.size());
  for (size_t i = 0; i < f.size(); ++i) src[i] = keps_[i] * f[i];
  sp_->convolve_bp(src, eps_, out);
}

double EnergyModel::quartic(const Field& u) {
  if (!has_k_) return 0.0;
  Field src(u.size());
  for (size_t i = 0; i < u.size(); ++i) src[i] = keps_[i] * u[i] * u[i];
  Field phi;
  sp_->convolve_bp(src, eps_, phi);
  return sp_->inner_l2(phi, src);
}

double EnergyModel::quartic_form(const Field& u1, const Field& u2,
                                 const Field& u3, const Field& u4) {
  if (!has_k_) return 0.0;
  Field a(u1.size()), b(u1.size());
  for (size_t i = 0; i < u1.size(); ++i) {
    a[i] = keps_[i] * u1[i] * u2[i];
    b[i] = keps_[i] * u3[i] * u4[i];
  }
  Field phi;
  sp_->convolve_bp(a, eps_, phi);
  return sp_->inner_l2(phi, b);
}

void EnergyModel::check_leakage(const Field& u) const {
  if (leakage_tolerance <= 0) return;
  double leak = shell_leakage(grid_, u);
  if (leak > leakage_tolerance)
    throw InvalidModel("field mass on the outermost grid shell (" +
                       format_g17(leak) + ") exceeds the box-confinement tolerance");
}

double EnergyModel::energy_local(const Field& u) {
  check_leakage(u);
  double vl2 = 0;
  for (size_t i = 0; i < u.size(); ++i) vl2 += veps_[i] * u[i] * u[i];
  const double h3 = std::pow(grid_.h(), 3);
  double lp1 = 0;
  for (double v : u) lp1 += std::pow(std::fabs(v), p_ + 1.0);
  return 0.5 * (sp_->grad_inner(u, u) + vl2 * h3) - lp1 * h3 / (p_ + 1.0);
}

double EnergyModel::energy_sbp(const Field& u) {
  double e = energy_local(u);
  if (has_k_) e += 0.25 * std::pow(eps_, 3) * quartic(u);
  return e;
}

double EnergyModel::energy_coulomb(const Field& u) {
  double e = energy_local(u);
  if (has_k_) {
    Field src(u.size());
    for (size_t i = 0; i < u.size(); ++i) src[i] = keps_[i] * u[i] * u[i];
    Field phi;
    sp_->convolve_coulomb(src, phi);
    e += 0.25 * eps_ * eps_ * sp_->inner_l2(phi, src);
  }
  return e;
}

void EnergyModel::residual(const Field& u, Field& out) {
  check_leakage(u);
  sp_->laplacian(u, out);
  Field up;
  signed_power(u, p_, up);
  if (has_k_) {
    Field src(u.size());
    for (size_t i = 0; i < u.size(); ++i) src[i] = keps_[i] * u[i] * u[i];
    Field phi;
    sp_->convolve_bp(src, eps_, phi);
    const double e3 = std::pow(eps_, 3);
    for (size_t i = 0; i < u.size(); ++i)
      out[i] = -out[i] + veps_[i] * u[i] + e3 * keps_[i] * phi[i] * u[i] - up[i];
  } else {
    for (size_t i = 0; i < u.size(); ++i)
      out[i] = -out[i] + veps_[i] * u[i] - up[i];
  }
}

double EnergyModel::resid_dual_norm(const Field& u) {
  Field r;
  residual(u, r);
  return sp_->dual_norm_h1(r);
}

EnergyModel::Hess EnergyModel::hessian(const Field& u) {
  Hess H;
  H.m = this;
  H.with_k = has_k_;
  power_deriv(u, p_, H.diag);
  for (size_t i = 0; i < u.size(); ++i) H.diag[i] = veps_[i] - H.diag[i];
  if (has_k_) {
    Field src(u.size());
    H.ku.resize(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
      H.ku[i] = keps_[i] * u[i];
      src[i] = H.ku[i] * u[i];
    }
    Field phi;
    sp_->convolve_bp(src, eps_, phi);
    const double e3 = std::pow(eps_, 3);
    for (size_t i = 0; i < u.size(); ++i) H.diag[i] += e3 * keps_[i] * phi[i];
  }
  return H;
}

void EnergyModel::Hess::apply(const Field& x, Field& out) const {
  m->sp_->laplacian(x, out);
  for (size_t i = 0; i < x.size(); ++i) out[i] = -out[i] + diag[i] * x[i];
  if (with_k) {
    Field src(x.size());
    for (size_t i = 0; i < x.size(); ++i) src[i] = ku[i] * x[i];
    Field phi;
    m->sp_->convolve_bp(src, m->eps_, phi);
    const double e3 = 2.0 * std::pow(m->eps_, 3);
    for (size_t i = 0; i < x.size(); ++i) out[i] += e3 * ku[i] * phi[i];
  }
}

}  // namespace sbp
