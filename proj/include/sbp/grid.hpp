// Uniform cubic grid centered at an arbitrary point, plain double fields,
// and the snapshot interchange format (one JSON header line + raw float64).
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sbp {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Cell-centered-on-node layout: node i of axis d sits at
// center[d] + (i - n/2) h, h = 2L/n; index (ix*n + iy)*n + iz.
struct Grid3 {
  int n = 64;
  double L = 14.0;
  Vec3 center{0, 0, 0};

  double h() const { return 2.0 * L / n; }
  int64_t npts() const { return static_cast<int64_t>(n) * n * n; }
  double coord(int d, int i) const { return center[d] + (i - n / 2) * h(); }
  int64_t idx(int ix, int iy, int iz) const {
    return (static_cast<int64_t>(ix) * n + iy) * n + iz;
  }
  bool same_shape(const Grid3& o) const { return n == o.n && L == o.L; }
  bool operator==(const Grid3& o) const {
    return same_shape(o) && center == o.center;
  }
};

using Field = std::vector<double>;

// Evaluate a radial function f(|x - at|) on every node.
template <class F>
Field sample_radial(const Grid3& g, const Vec3& at, F&& f) {
  Field out(g.npts());
  const int n = g.n;
  for (int ix = 0; ix < n; ++ix) {
    const double dx = g.coord(0, ix) - at[0];
    for (int iy = 0; iy < n; ++iy) {
      const double dy = g.coord(1, iy) - at[1];
      const double rho2 = dx * dx + dy * dy;
      double* row = out.data() + g.idx(ix, iy, 0);
      for (int iz = 0; iz < n; ++iz) {
        const double dz = g.coord(2, iz) - at[2];
        row[iz] = f(std::sqrt(rho2 + dz * dz));
      }
    }
  }
  return out;
}

template <class F>
Field sample_pointwise(const Grid3& g, F&& f) {
  Field out(g.npts());
  const int n = g.n;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      double* row = out.data() + g.idx(ix, iy, 0);
      const double x = g.coord(0, ix), y = g.coord(1, iy);
      for (int iz = 0; iz < n; ++iz) row[iz] = f(Vec3{x, y, g.coord(2, iz)});
    }
  return out;
}

// axpy-style helpers shared by the solvers
void field_axpy(double a, const Field& x, Field& y);          // y += a x
double field_max_abs(const Field& x);

// max |value on the outermost node shell| / max |value|; large values flag a
// box too small for the field it holds.  Returns 0 for the zero field.
double shell_leakage(const Grid3& g, const Field& f);

// Snapshot: '{"n":..,"L":..,"center":[..],"label":".."}\n' + n^3 float64
// little-endian in index order, then nothing else.  Round-trips bit exact.
void save_snapshot(const Grid3& g, const Field& f, const std::string& label,
                   const std::string& path);
struct Snapshot {
  Grid3 grid;
  Field data;
  std::string label;
};
Snapshot load_snapshot(const std::string& path);

}  // namespace sbp
