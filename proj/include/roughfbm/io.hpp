#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "roughfbm/core.hpp"
#include "roughfbm/fbm.hpp"
#include "roughfbm/roughpath.hpp"

namespace roughfbm {

// Round-trip safe decimal formatting; all emitted artifacts use it so reruns
// with the same config are byte-identical.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Leading comment line carrying the resolved run configuration. Readers skip
/// any line starting with '#'; the lift reader parses hurst/flavor back out
/// of it.
inline void write_config_comment(std::ostream& os, const std::string& config_json) {
  os << "# config: " << config_json << "\n";
}

// ---- paths.csv: path_id, t, component_0..component_{d-1} -------------------

inline void write_paths_csv(std::ostream& os, const std::vector<FbmPath>& paths,
                            const std::string& config_json) {
  if (paths.empty()) throw std::invalid_argument("write_paths_csv: no paths");
  const std::size_t d = paths.front().model.dimension;
  write_config_comment(os, config_json);
  os << "path_id,t";
  for (std::size_t c = 0; c < d; ++c) os << ",component_" << c;
  os << "\n";
  for (const FbmPath& p : paths)
    for (std::size_t k = 0; k <= p.grid.n; ++k) {
      os << p.path_index << ',' << fmt_double(p.grid.time(k));
      for (std::size_t c = 0; c < d; ++c) os << ',' << fmt_double(p.values[k][c]);
      os << "\n";
    }
}

struct SampledPaths {
  Grid grid;
  std::size_t dim = 1;
  std::vector<std::uint64_t> ids;
  std::vector<std::vector<Vec>> values; // per path, per node
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace detail

inline SampledPaths read_paths_csv(std::istream& is) {
  SampledPaths out;
  std::string line;
  std::vector<double> times;
  std::vector<std::vector<Vec>>& paths = out.values;
  bool header_seen = false;
  std::size_t dim = 0;

  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      const auto cols = detail::split_csv_line(line);
      if (cols.size() < 3 || cols[0] != "path_id" || cols[1] != "t")
        throw std::invalid_argument("read_paths_csv: unexpected header");
      dim = cols.size() - 2;
      header_seen = true;
      continue;
    }
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != dim + 2) throw std::invalid_argument("read_paths_csv: bad row width");
    const auto id = static_cast<std::uint64_t>(std::stoull(cols[0]));
    if (out.ids.empty() || out.ids.back() != id) {
      out.ids.push_back(id);
      paths.emplace_back();
    }
    if (paths.size() == 1) times.push_back(std::stod(cols[1]));
    Vec v(dim);
    for (std::size_t c = 0; c < dim; ++c) v[c] = std::stod(cols[2 + c]);
    paths.back().push_back(std::move(v));
  }
  if (paths.empty() || times.size() < 2)
    throw std::invalid_argument("read_paths_csv: no data rows");
  for (const auto& p : paths)
    if (p.size() != times.size())
      throw std::invalid_argument("read_paths_csv: ragged path lengths");

  out.dim = dim;
  out.grid = Grid(times.front(), times.back(), times.size() - 1);
  const double dt = out.grid.dt();
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - out.grid.time(k)) > 1e-9 * std::max(1.0, std::abs(times.back())))
      throw std::invalid_argument("read_paths_csv: grid is not uniform");
  (void)dt;
  return out;
}

// ---- lift.csv: path_id, k, t_k, dx_0.., x2_{ij} row-major -------------------

inline void write_lift_csv(std::ostream& os, const std::vector<Level2Path>& lifts,
                           const std::vector<std::uint64_t>& ids, const std::string& config_json) {
  if (lifts.empty()) throw std::invalid_argument("write_lift_csv: no lifts");
  const std::size_t d = lifts.front().dim;
  write_config_comment(os, config_json);
  os << "path_id,k,t_k";
  for (std::size_t c = 0; c < d; ++c) os << ",dx_" << c;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) os << ",x2_" << i << j;
  os << "\n";
  for (std::size_t p = 0; p < lifts.size(); ++p) {
    const Level2Path& rp = lifts[p];
    for (std::size_t k = 0; k < rp.grid.n; ++k) {
      os << ids[p] << ',' << k << ',' << fmt_double(rp.grid.time(k));
      const auto inc = rp.inc_at(k);
      for (std::size_t c = 0; c < d; ++c) os << ',' << fmt_double(inc[c]);
      const auto l2 = rp.lv2_at(k);
      for (std::size_t q = 0; q < d * d; ++q) os << ',' << fmt_double(l2[q]);
      os << "\n";
    }
  }
}

struct LiftFile {
  std::vector<Level2Path> lifts;
  std::vector<std::uint64_t> ids;
  std::string config_json; // raw config comment payload, may be empty
};

inline LiftFile read_lift_csv(std::istream& is, Flavor flavor) {
  LiftFile out;
  std::string line;
  bool header_seen = false;
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> inc_rows, lv2_rows; // per current path
  std::vector<std::vector<std::vector<double>>> all_inc, all_lv2;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("config: ");
      if (pos != std::string::npos) out.config_json = line.substr(pos + 8);
      continue;
    }
    if (!header_seen) {
      const auto cols = detail::split_csv_line(line);
      if (cols.size() < 5 || cols[0] != "path_id" || cols[1] != "k")
        throw std::invalid_argument("read_lift_csv: unexpected header");
      // 3 fixed columns + d + d^2
      const std::size_t extra = cols.size() - 3;
      dim = 1;
      while (dim + dim * dim < extra) ++dim;
      if (dim + dim * dim != extra) throw std::invalid_argument("read_lift_csv: bad column count");
      header_seen = true;
      continue;
    }
    const auto cols = detail::split_csv_line(line);
    const auto id = static_cast<std::uint64_t>(std::stoull(cols[0]));
    if (out.ids.empty() || out.ids.back() != id) {
      out.ids.push_back(id);
      all_inc.emplace_back();
      all_lv2.emplace_back();
    }
    if (all_inc.size() == 1) times.push_back(std::stod(cols[2]));
    std::vector<double> inc(dim), lv2(dim * dim);
    for (std::size_t c = 0; c < dim; ++c) inc[c] = std::stod(cols[3 + c]);
    for (std::size_t q = 0; q < dim * dim; ++q) lv2[q] = std::stod(cols[3 + dim + q]);
    all_inc.back().push_back(std::move(inc));
    all_lv2.back().push_back(std::move(lv2));
  }
  if (all_inc.empty()) throw std::invalid_argument("read_lift_csv: no data rows");

  const std::size_t n = all_inc.front().size();
  const double t0 = times.front();
  const double dt = n > 1 ? times[1] - times[0] : 1.0;
  const Grid grid(t0, times.back() + dt, n);
  for (std::size_t p = 0; p < all_inc.size(); ++p) {
    Level2Path rp(grid, dim, flavor);
    for (std::size_t k = 0; k < n; ++k) {
      auto ik = rp.inc_at(k);
      for (std::size_t c = 0; c < dim; ++c) ik[c] = all_inc[p][k][c];
      auto l2 = rp.lv2_at(k);
      for (std::size_t q = 0; q < dim * dim; ++q) l2[q] = all_lv2[p][k][q];
    }
    out.lifts.push_back(std::move(rp));
  }
  return out;
}

// ---- integral.csv: path_id, k, t_k, y1_0.., y2_{ij} row-major ---------------

inline void write_integral_csv(std::ostream& os, const std::vector<Level2Path>& integrals,
                               const std::vector<std::uint64_t>& ids,
                               const std::string& config_json) {
  if (integrals.empty()) throw std::invalid_argument("write_integral_csv: no data");
  const std::size_t e = integrals.front().dim;
  write_config_comment(os, config_json);
  os << "path_id,k,t_k";
  for (std::size_t c = 0; c < e; ++c) os << ",y1_" << c;
  for (std::size_t i = 0; i < e; ++i)
    for (std::size_t j = 0; j < e; ++j) os << ",y2_" << i << j;
  os << "\n";
  for (std::size_t p = 0; p < integrals.size(); ++p) {
    const Level2Path& y = integrals[p];
    for (std::size_t k = 0; k < y.grid.n; ++k) {
      os << ids[p] << ',' << k << ',' << fmt_double(y.grid.time(k));
      const auto inc = y.inc_at(k);
      for (std::size_t c = 0; c < e; ++c) os << ',' << fmt_double(inc[c]);
      const auto l2 = y.lv2_at(k);
      for (std::size_t q = 0; q < e * e; ++q) os << ',' << fmt_double(l2[q]);
      os << "\n";
    }
  }
}

// ---- solution.csv: path_id, k, t_k, y_0.. (node values) ---------------------

inline void write_solution_csv(std::ostream& os,
                               const std::vector<std::vector<Vec>>& solutions,
                               const std::vector<std::uint64_t>& ids, const Grid& grid,
                               const std::string& config_json) {
  if (solutions.empty()) throw std::invalid_argument("write_solution_csv: no data");
  const std::size_t e = solutions.front().front().size();
  write_config_comment(os, config_json);
  os << "path_id,k,t_k";
  for (std::size_t c = 0; c < e; ++c) os << ",y_" << c;
  os << "\n";
  for (std::size_t p = 0; p < solutions.size(); ++p)
    for (std::size_t k = 0; k < solutions[p].size(); ++k) {
      os << ids[p] << ',' << k << ',' << fmt_double(grid.time(k));
      for (std::size_t c = 0; c < e; ++c) os << ',' << fmt_double(solutions[p][k][c]);
      os << "\n";
    }
}

// ---- fig curve CSV: T,H,price ----------------------------------------------

struct CurveRow {
  double maturity, hurst, price;
};

inline void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows,
                            const std::string& config_json) {
  write_config_comment(os, config_json);
  os << "T,H,price\n";
  for (const auto& r : rows)
    os << fmt_double(r.maturity) << ',' << fmt_double(r.hurst) << ',' << fmt_double(r.price)
       << "\n";
}

} // namespace roughfbm
