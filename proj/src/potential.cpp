#include "sbp/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace sbp {
namespace {

// d/dt maps P(t) e^{-t^2/s^2}  ->  (P'(t) - (2t/s^2) P(t)) e^{-t^2/s^2}
std::vector<double> poly_step(const std::vector<double>& P, double inv_s2) {
  std::vector<double> out(P.size() + 1, 0.0);
  for (size_t j = 1; j < P.size(); ++j) out[j - 1] += j * P[j];
  for (size_t j = 0; j < P.size(); ++j) out[j + 1] -= 2.0 * inv_s2 * P[j];
  return out;
}

double poly_eval(const std::vector<double>& P, double t) {
  double v = 0;
  for (size_t j = P.size(); j-- > 0;) v = v * t + P[j];
  return v;
}

// m-th derivative of t^q e^{-t^2/s^2} at t
double factor_derivative(int q, double inv_s2, int m, double t) {
  std::vector<double> P(q + 1, 0.0);
  P[q] = 1.0;
  for (int j = 0; j < m; ++j) P = poly_step(P, inv_s2);
  return poly_eval(P, t) * std::exp(-t * t * inv_s2);
}

}  // namespace

double PotentialSpec::value(const Vec3& x) const {
  double v = c0;
  for (const auto& b : bumps) {
    const Vec3 d = x - b.center;
    const double r2 = dot(d, d);
    double mono = 1.0;
    for (int dim = 0; dim < 3; ++dim)
      for (int j = 0; j < b.q[dim]; ++j) mono *= d[dim];
    v += b.a * mono * std::exp(-r2 / (b.sigma * b.sigma));
  }
  return v;
}

double PotentialSpec::derivative(const Vec3& x, const std::array<int, 3>& orders) const {
  for (int m : orders)
    if (m < 0) throw std::invalid_argument("derivative orders must be >= 0");
  if (orders[0] == 0 && orders[1] == 0 && orders[2] == 0) return value(x);
  double v = 0;
  for (const auto& b : bumps) {
    const double inv_s2 = 1.0 / (b.sigma * b.sigma);
    double term = b.a;
    for (int dim = 0; dim < 3; ++dim)
      term *= factor_derivative(b.q[dim], inv_s2, orders[dim], x[dim] - b.center[dim]);
    v += term;
  }
  return v;
}

Vec3 PotentialSpec::gradient(const Vec3& x) const {
  return {derivative(x, {1, 0, 0}), derivative(x, {0, 1, 0}), derivative(x, {0, 0, 1})};
}

std::array<std::array<double, 3>, 3> PotentialSpec::hessian(const Vec3& x) const {
  std::array<std::array<double, 3>, 3> H{};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      std::array<int, 3> ord{0, 0, 0};
      ord[i] += 1;
      ord[j] += 1;
      H[i][j] = H[j][i] = derivative(x, ord);
    }
  return H;
}

}  // namespace sbp
