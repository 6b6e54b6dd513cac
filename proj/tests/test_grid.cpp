// Grid layout, sampling helpers, snapshot interchange.
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "sbp/grid.hpp"

using namespace sbp;

TEST_CASE("node layout and index arithmetic") {
  Grid3 g{8, 2.0, {0.5, -1.0, 0.0}};
  CHECK(g.h() == doctest::Approx(0.5));
  CHECK(g.npts() == 512);
  // center node lands on the grid center
  CHECK(g.coord(0, 4) == doctest::Approx(0.5));
  CHECK(g.coord(1, 4) == doctest::Approx(-1.0));
  // extremes: [-L, L - h) around the center
  CHECK(g.coord(0, 0) == doctest::Approx(0.5 - 2.0));
  CHECK(g.coord(0, 7) == doctest::Approx(0.5 + 2.0 - 0.5));
  CHECK(g.idx(0, 0, 0) == 0);
  CHECK(g.idx(1, 0, 0) == 64);
  CHECK(g.idx(0, 1, 0) == 8);
  CHECK(g.idx(0, 0, 1) == 1);
  CHECK(g.idx(7, 7, 7) == 511);

  Grid3 same{8, 2.0, {0, 0, 0}};
  CHECK(g.same_shape(same));
  CHECK_FALSE(g == same);
  same.center = g.center;
  CHECK(g == same);
}

TEST_CASE("radial and pointwise sampling agree") {
  Grid3 g{16, 3.0, {0, 0, 0}};
  const Vec3 at{0.3, -0.2, 0.1};
  Field a = sample_radial(g, at, [](double r) { return std::exp(-r * r); });
  Field b = sample_pointwise(g, [&](const Vec3& x) {
    const Vec3 d = x - at;
    return std::exp(-dot(d, d));
  });
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("vector helpers") {
  const Vec3 a{1, 2, 3}, b{-1, 0.5, 2};
  CHECK(dot(a, b) == doctest::Approx(6.0));
  CHECK(norm(Vec3{3, 4, 0}) == doctest::Approx(5.0));
  const Vec3 c = a + 2.0 * b;
  CHECK(c[0] == doctest::Approx(-1.0));
  CHECK(c[2] == doctest::Approx(7.0));

  Field y{1, 2, 3}, x{10, 20, 30};
  field_axpy(0.5, x, y);
  CHECK(y[0] == doctest::Approx(6.0));
  CHECK(y[2] == doctest::Approx(18.0));
  CHECK(field_max_abs(Field{-7, 3, 2}) == doctest::Approx(7.0));
}

TEST_CASE("shell leakage flags fields that do not fit the box") {
  Grid3 g{24, 6.0, {0, 0, 0}};
  Field narrow = sample_radial(g, {0, 0, 0}, [](double r) { return std::exp(-r * r); });
  Field wide = sample_radial(g, {0, 0, 0}, [](double r) { return std::exp(-r / 8.0); });
  CHECK(shell_leakage(g, narrow) < 1e-10);
  CHECK(shell_leakage(g, wide) > 0.1);
  CHECK(shell_leakage(g, Field(g.npts(), 0.0)) == 0.0);
}

TEST_CASE("snapshot round-trip is bit exact") {
  Grid3 g{12, 4.5, {0.25, 0, -1.5}};
  Field f(g.npts());
  // irrational-ish fill so every byte pattern is exercised
  for (size_t i = 0; i < f.size(); ++i)
    f[i] = std::sin(0.371 * static_cast<double>(i)) * std::exp(-1e-3 * static_cast<double>(i));
  f[7] = 0.1 + 0.2;  // classic non-representable sum
  const std::string path = "test_snapshot_roundtrip.snap";
  save_snapshot(g, f, "corrector", path);

  Snapshot back = load_snapshot(path);
  CHECK(back.grid == g);
  CHECK(back.label == "corrector");
  REQUIRE(back.data.size() == f.size());
  bool identical = true;
  for (size_t i = 0; i < f.size(); ++i)
    if (back.data[i] != f[i]) identical = false;
  CHECK(identical);
  std::remove(path.c_str());
}
