// Small shared helpers: counter-based RNG, least-squares fits, CSV emission,
// bounded thread pool. Nothing here knows about the physics.
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sbp {

// ---------------------------------------------------------------- errors ---

struct InvalidModel : std::runtime_error {
  explicit InvalidModel(const std::string& what) : std::runtime_error(what) {}
};

struct NumericFailure : std::runtime_error {
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

// ------------------------------------------------------------------- rng ---
// Stateless counter-based generator (splitmix64 core): stream(seed)[counter]
// is reproducible regardless of evaluation order, which keeps Monte-Carlo
// oracles bitwise stable under any loop restructuring.

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct CounterRng {
  uint64_t seed = 0;
  // uniform in (0,1); never returns 0 so log() is safe
  double uniform(uint64_t counter) const {
    uint64_t z = splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dull) + counter);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }
};

// ------------------------------------------------------------------ fits ---

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw NumericFailure("fit_line: need >= 2 matching samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i];
    sxx += x[i] * x[i]; sxy += x[i] * y[i]; syy += y[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-300) throw NumericFailure("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  const double sstot = syy - sy * sy / n;
  double ssres = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.slope * x[i] + f.intercept);
    ssres += e * e;
  }
  f.r2 = sstot > 0 ? 1.0 - ssres / sstot : 1.0;
  return f;
}

// log-log order fit: y ~ C * x^s. Nonpositive samples are rejected.
inline LineFit fit_order(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size()); ly.reserve(y.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw NumericFailure("fit_order: nonpositive sample");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

// ------------------------------------------------------------------- csv ---
// All numeric output is printed with %.17g so that reruns are bitwise
// comparable.

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns)
      : out_(path), ncol_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    for (size_t i = 0; i < columns.size(); ++i)
      out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }
  void row(const std::vector<double>& values) {
    if (values.size() != ncol_) throw std::runtime_error("csv row arity mismatch");
    for (size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << format_g17(values[i]);
    out_ << "\n";
  }
  void row_mixed(const std::vector<std::string>& values) {
    if (values.size() != ncol_) throw std::runtime_error("csv row arity mismatch");
    for (size_t i = 0; i < values.size(); ++i)
      out_ << (i ? "," : "") << values[i];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
  size_t ncol_;
};

// --------------------------------------------------------------- threads ---

inline int thread_count() {
  if (const char* env = std::getenv("SBP_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Index-ordered parallel loop over [0, n). Chunks are assigned statically so
// the partition (and hence any per-chunk accumulation order) is deterministic.
inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body) {
  const int nt = thread_count();
  if (nt <= 1 || n < 4096) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int64_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const int64_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

inline double sqr(double x) { return x * x; }

}  // namespace sbp
