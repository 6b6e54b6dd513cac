#include "sbp/grid.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace sbp {

void field_axpy(double a, const Field& x, Field& y) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double field_max_abs(const Field& x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

double shell_leakage(const Grid3& g, const Field& f) {
  const int n = g.n;
  double shell = 0, all = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const double* row = f.data() + g.idx(ix, iy, 0);
      const bool edge_xy = ix == 0 || ix == n - 1 || iy == 0 || iy == n - 1;
      if (edge_xy) {
        for (int iz = 0; iz < n; ++iz) shell = std::max(shell, std::fabs(row[iz]));
      } else {
        shell = std::max({shell, std::fabs(row[0]), std::fabs(row[n - 1])});
      }
      for (int iz = 0; iz < n; ++iz) all = std::max(all, std::fabs(row[iz]));
    }
  return all == 0 ? 0.0 : shell / all;
}

void save_snapshot(const Grid3& g, const Field& f, const std::string& label,
                   const std::string& path) {
  if (static_cast<int64_t>(f.size()) != g.npts())
    throw std::runtime_error("snapshot: field size does not match grid");
  nlohmann::json hdr;
  hdr["n"] = g.n;
  hdr["L"] = g.L;
  hdr["center"] = {g.center[0], g.center[1], g.center[2]};
  hdr["label"] = label;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << hdr.dump() << "\n";
  // raw little-endian float64 (x86-64 native layout)
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw std::runtime_error("snapshot write failed: " + path);
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot header missing: " + path);
  const nlohmann::json hdr = nlohmann::json::parse(line);
  Snapshot s;
  s.grid.n = hdr.at("n").get<int>();
  s.grid.L = hdr.at("L").get<double>();
  const auto c = hdr.at("center");
  s.grid.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  s.label = hdr.value("label", "");
  s.data.resize(s.grid.npts());
  in.read(reinterpret_cast<char*>(s.data.data()),
          static_cast<std::streamsize>(s.data.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(s.data.size() * sizeof(double)))
    throw std::runtime_error("snapshot payload truncated: " + path);
  return s;
}

}  // namespace sbp
