// Smooth potential models: constant plus a sum of anisotropy-free Gaussian
// bumps carrying monomial prefactors,
//   c0 + sum_b a_b (x-c_b)^{q_b} exp(-|x-c_b|^2 / sigma_b^2),
// with exact mixed partial derivatives of any order (the 1D factors stay in
// the polynomial-times-Gaussian class under differentiation).
#pragma once

#include <array>

#include "sbp/grid.hpp"

namespace sbp {

struct BumpTerm {
  double a = 0.0;
  Vec3 center{0, 0, 0};
  double sigma = 1.0;
  std::array<int, 3> q{0, 0, 0};  // monomial powers per axis, >= 0
};

struct PotentialSpec {
  double c0 = 0.0;
  std::vector<BumpTerm> bumps;

  double value(const Vec3& x) const;
  // mixed partial d^{m1+m2+m3} / dx1^m1 dx2^m2 dx3^m3, exact
  double derivative(const Vec3& x, const std::array<int, 3>& orders) const;
  Vec3 gradient(const Vec3& x) const;
  std::array<std::array<double, 3>, 3> hessian(const Vec3& x) const;
  bool is_constant() const { return bumps.empty(); }
  bool is_zero() const { return bumps.empty() && c0 == 0.0; }
};

}  // namespace sbp
