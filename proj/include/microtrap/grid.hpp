#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "microtrap/field.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// Axis-aligned sample box. An axis with count 1 is flat (plane or line
// selector); active axes need >= 2 samples and positive extent.
struct GridSpec {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  std::array<int, 3> counts = {1, 1, 1};

  void validate() const {
    for (int i = 0; i < 3; ++i) {
      if (counts[i] < 1) throw ValidationError("grid counts must be >= 1");
      if (counts[i] >= 2 && !(hi[i] > lo[i]))
        throw ValidationError("grid extent must be positive on active axes");
    }
  }

  std::size_t size() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }

  double coord(int axis, int idx) const {
    if (counts[axis] == 1) return lo[axis];
    return lo[axis] + (hi[axis] - lo[axis]) * idx / (counts[axis] - 1);
  }

  // x fastest, then y, then z
  Vec3 point(std::size_t flat) const {
    const int ix = static_cast<int>(flat % counts[0]);
    const int iy = static_cast<int>((flat / counts[0]) % counts[1]);
    const int iz = static_cast<int>(flat / (static_cast<std::size_t>(counts[0]) * counts[1]));
    return Vec3(coord(0, ix), coord(1, iy), coord(2, iz));
  }
};

struct GridResult {
  GridSpec spec;
  std::vector<double> norm;          // |B| [T], NaN at singular samples
  std::vector<Vec3> components;      // optional, empty unless requested
  std::size_t singular_count = 0;
};

struct GridOptions {
  bool components = false;
  int threads = 1;  // any partitioning yields identical per-point results
};

inline GridResult grid_eval(const Layout& layout, const GridSpec& spec,
                            const ChannelValues& values = {},
                            const GridOptions& opts = {}) {
  spec.validate();
  GridResult out;
  out.spec = spec;
  out.norm.assign(spec.size(), 0.0);
  if (opts.components) out.components.assign(spec.size(), Vec3::Zero());

  std::vector<unsigned char> singular(spec.size(), 0);
  auto eval_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Vec3 p = spec.point(k);
      try {
        const Vec3 B = field_total(layout, p, values);
        out.norm[k] = B.norm();
        if (opts.components) out.components[k] = B;
      } catch (const FieldSingularity&) {
        out.norm[k] = std::numeric_limits<double>::quiet_NaN();
        if (opts.components)
          out.components[k] = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
        singular[k] = 1;
      }
    }
  };

  const int nthreads = std::max(1, opts.threads);
  if (nthreads == 1 || spec.size() < 2 * static_cast<std::size_t>(nthreads)) {
    eval_range(0, spec.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (spec.size() + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(spec.size(), b + chunk);
      if (b < e) pool.emplace_back(eval_range, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (auto s : singular) out.singular_count += s;
  return out;
}

// CSV with coordinates in um and fields in G; singular samples print "nan".
inline std::string grid_to_csv(const GridResult& grid) {
  std::ostringstream os;
  os.precision(12);
  os << "x_um,y_um,z_um,B_G";
  if (!grid.components.empty()) os << ",Bx_G,By_G,Bz_G";
  os << "\n";
  for (std::size_t k = 0; k < grid.norm.size(); ++k) {
    const Vec3 p = grid.spec.point(k);
    os << m_to_um(p.x()) << "," << m_to_um(p.y()) << "," << m_to_um(p.z()) << ","
       << tesla_to_gauss(grid.norm[k]);
    if (!grid.components.empty()) {
      const Vec3& B = grid.components[k];
      os << "," << tesla_to_gauss(B.x()) << "," << tesla_to_gauss(B.y()) << ","
         << tesla_to_gauss(B.z());
    }
    os << "\n";
  }
  return os.str();
}

// JSON grid object; NaN serializes as null.
inline std::string grid_to_json(const GridResult& grid) {
  nlohmann::json j;
  j["format_version"] = "1.0";
  j["spec"] = {
      {"lo_um", {m_to_um(grid.spec.lo.x()), m_to_um(grid.spec.lo.y()), m_to_um(grid.spec.lo.z())}},
      {"hi_um", {m_to_um(grid.spec.hi.x()), m_to_um(grid.spec.hi.y()), m_to_um(grid.spec.hi.z())}},
      {"counts", {grid.spec.counts[0], grid.spec.counts[1], grid.spec.counts[2]}},
      {"order", "x-fastest"}};
  nlohmann::json vals = nlohmann::json::array();
  for (double v : grid.norm) vals.push_back(tesla_to_gauss(v));
  j["values_G"] = std::move(vals);
  j["singular_count"] = grid.singular_count;
  return j.dump();
}

}  // namespace microtrap
