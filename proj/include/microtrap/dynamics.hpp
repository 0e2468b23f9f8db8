#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "microtrap/errors.hpp"
#include "microtrap/field.hpp"
#include "microtrap/schedule.hpp"
#include "microtrap/species.hpp"
#include "microtrap/trap_analysis.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// ---------------------------------------------------------------------------
// 1D adiabatic potential along the guide axis: U(x) = mu * B_min(x), plus
// m g z_min(x) when the layout carries gravity. Atoms are classical point
// masses; transverse motion is assumed adiabatically confined.

struct PotentialCurve1D {
  std::vector<double> x;  // [m], uniform spacing
  std::vector<double> U;  // [J]
  double t = 0.0;         // schedule time the curve was evaluated at [s]
};

inline PotentialCurve1D potential_1d(const Layout& layout, const ChannelValues& values,
                                     double x_begin, double x_end, int n,
                                     const AtomSpecies& species, double t = 0.0) {
  const auto prof = longitudinal_profile(layout, x_begin, x_end, n, values);
  PotentialCurve1D curve;
  curve.t = t;
  curve.x = prof.x;
  curve.U.reserve(prof.x.size());
  const double mu = species.magnetic_moment();
  for (std::size_t i = 0; i < prof.x.size(); ++i) {
    double u = mu * prof.exact_Bmin[i];
    if (layout.include_gravity())
      u += species.mass * constants::g_earth * prof.exact_pos[i].z();
    curve.U.push_back(u);
  }
  return curve;
}

inline PotentialCurve1D potential_1d(const Layout& layout, const Schedule& schedule,
                                     double t, double x_begin, double x_end, int n,
                                     const AtomSpecies& species) {
  return potential_1d(layout, schedule.values_at(t), x_begin, x_end, n, species, t);
}

// ---------------------------------------------------------------------------
// Natural cubic spline; the integrator differentiates it analytically so the
// force is exactly the gradient of the interpolated potential.

class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw InvalidParams("spline needs >= 3 samples");
    std::vector<double> h(n - 1), alpha(n, 0.0), l(n), mu(n), z(n);
    for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
    for (std::size_t i = 1; i + 1 < n; ++i)
      alpha[i] = 3.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    l[0] = 1.0;
    mu[0] = z[0] = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      l[i] = 2.0 * (x_[i + 1] - x_[i - 1]) - h[i - 1] * mu[i - 1];
      mu[i] = h[i] / l[i];
      z[i] = (alpha[i] - h[i - 1] * z[i - 1]) / l[i];
    }
    c_.assign(n, 0.0);
    b_.assign(n - 1, 0.0);
    d_.assign(n - 1, 0.0);
    for (std::size_t j = n - 1; j-- > 0;) {
      c_[j] = z[j] - mu[j] * c_[j + 1];
      b_[j] = (y_[j + 1] - y_[j]) / h[j] - h[j] * (c_[j + 1] + 2.0 * c_[j]) / 3.0;
      d_[j] = (c_[j + 1] - c_[j]) / (3.0 * h[j]);
    }
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

  double value(double x) const {
    const std::size_t j = locate(x);
    const double dx = x - x_[j];
    return y_[j] + dx * (b_[j] + dx * (c_[j] + dx * d_[j]));
  }

  double derivative(double x) const {
    const std::size_t j = locate(x);
    const double dx = x - x_[j];
    return b_[j] + dx * (2.0 * c_[j] + 3.0 * dx * d_[j]);
  }

 private:
  std::size_t locate(double x) const {
    if (x < x_.front() || x > x_.back())
      throw EscapedDomain("position left the tabulated potential range");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - x_.begin());
    return std::min(std::max<std::size_t>(j, 1) - 1, x_.size() - 2);
  }

  std::vector<double> x_, y_, b_, c_, d_;
};

inline CubicSpline spline_of(const PotentialCurve1D& curve) {
  return CubicSpline(curve.x, curve.U);
}

// ---------------------------------------------------------------------------
// Clouds. A cloud is its tracked center of mass plus an optional ensemble of
// classical particles; the CM of an ensemble cloud is the ensemble mean.

struct Particle {
  double x;  // [m]
  double v;  // [m/s]
};

struct CloudState {
  std::string label;
  double x = 0.0;  // CM [m]
  double v = 0.0;  // CM [m/s]
  std::vector<Particle> ensemble;

  void refresh_cm() {
    if (ensemble.empty()) return;
    double sx = 0.0, sv = 0.0;
    for (const auto& p : ensemble) {
      sx += p.x;
      sv += p.v;
    }
    x = sx / ensemble.size();
    v = sv / ensemble.size();
  }
};

namespace dynamics_detail {

// Deterministic uniform in [0,1) from the raw engine; avoids the
// implementation-defined std::uniform_real_distribution sequences.
inline double canonical(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Acklam's rational approximation to the inverse normal CDF (|err| < 1.2e-9).
inline double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace dynamics_detail

// Samples N particles from the 1D Boltzmann distribution in the local well
// around `center`: positions by inverse-CDF of exp(-(U - U0)/kT) restricted
// to the basin (out to the nearest barriers), velocities Maxwellian. The
// cloud CM is set to the realized ensemble mean.
inline CloudState sample_thermal_cloud(const PotentialCurve1D& curve, double center,
                                       double temperature, int n_particles,
                                       std::uint64_t seed, const AtomSpecies& species,
                                       const std::string& label = "cloud") {
  if (n_particles < 1) throw InvalidParams("need at least one particle");
  if (temperature <= 0) throw InvalidParams("temperature must be positive");
  const auto& xs = curve.x;
  const auto& Us = curve.U;
  // index closest to center, then walk up the walls to the enclosing barriers
  std::size_t ic = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - center) < std::abs(xs[ic] - center)) ic = i;
  std::size_t il = ic, ir = ic;
  while (il > 0 && Us[il - 1] >= Us[il]) --il;
  while (ir + 1 < xs.size() && Us[ir + 1] >= Us[ir]) ++ir;
  double U0 = Us[ic];
  for (std::size_t i = il; i <= ir; ++i) U0 = std::min(U0, Us[i]);

  const double kT = constants::k_boltzmann * temperature;
  std::vector<double> cdf(ir - il + 1, 0.0);
  for (std::size_t i = il; i < ir; ++i) {
    const double wa = std::exp(-(Us[i] - U0) / kT);
    const double wb = std::exp(-(Us[i + 1] - U0) / kT);
    cdf[i - il + 1] = cdf[i - il] + 0.5 * (wa + wb) * (xs[i + 1] - xs[i]);
  }
  const double total = cdf.back();
  if (!(total > 0)) throw InvalidParams("thermal sampling found an empty basin");

  std::mt19937_64 rng(seed);
  const double sigma_v = std::sqrt(kT / species.mass);
  CloudState cloud;
  cloud.label = label;
  cloud.ensemble.reserve(n_particles);
  for (int k = 0; k < n_particles; ++k) {
    const double u = dynamics_detail::canonical(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t j = std::min<std::size_t>(cdf.size() - 2,
                                          std::max<std::ptrdiff_t>(1, it - cdf.begin()) - 1);
    const double frac = (u - cdf[j]) / std::max(cdf[j + 1] - cdf[j], 1e-300);
    const double x = xs[il + j] + frac * (xs[il + j + 1] - xs[il + j]);
    const double v =
        sigma_v * dynamics_detail::inverse_normal_cdf(dynamics_detail::canonical(rng));
    cloud.ensemble.push_back({x, v});
  }
  cloud.refresh_cm();
  return cloud;
}

// Removes ensemble particles whose 1D energy above the curve minimum exceeds
// the cutoff, then recomputes the CM.
inline CloudState rf_truncate(const CloudState& cloud, double energy_cutoff,
                              const PotentialCurve1D& curve, const AtomSpecies& species) {
  if (cloud.ensemble.empty())
    throw InvalidParams("rf truncation needs an ensemble representation");
  const CubicSpline U = spline_of(curve);
  const double U0 = *std::min_element(curve.U.begin(), curve.U.end());
  CloudState out;
  out.label = cloud.label;
  for (const auto& p : cloud.ensemble) {
    const double E = 0.5 * species.mass * p.v * p.v + (U.value(p.x) - U0);
    if (E <= energy_cutoff) out.ensemble.push_back(p);
  }
  if (out.ensemble.empty()) throw EmptyCloud("rf cutoff removed every particle");
  out.refresh_cm();
  return out;
}

// ---------------------------------------------------------------------------
// Velocity-Verlet integration on a static 1D potential. Positions may
// advance at most a fixed fraction of the potential's steepest feature
// length per step.

inline double feature_length(const PotentialCurve1D& curve) {
  double umin = curve.U.front(), umax = curve.U.front(), dmax = 0.0;
  for (double u : curve.U) {
    umin = std::min(umin, u);
    umax = std::max(umax, u);
  }
  for (std::size_t i = 0; i + 1 < curve.x.size(); ++i)
    dmax = std::max(dmax, std::abs(curve.U[i + 1] - curve.U[i]) /
                              (curve.x[i + 1] - curve.x[i]));
  if (dmax == 0.0) return std::numeric_limits<double>::infinity();
  return (umax - umin) / dmax;
}

// Advances every particle of a cloud by one velocity-Verlet step.
inline void verlet_step(std::vector<Particle>& particles, const CubicSpline& U,
                        double mass, double dt, double feature_len,
                        double max_step_fraction) {
  for (auto& p : particles) {
    if (std::abs(p.v) * dt > max_step_fraction * feature_len)
      throw StepTooLarge("time step too large for the potential's feature scale");
    const double a0 = -U.derivative(p.x) / mass;
    p.x += p.v * dt + 0.5 * a0 * dt * dt;
    const double a1 = -U.derivative(p.x) / mass;
    p.v += 0.5 * (a0 + a1) * dt;
  }
}

struct LinearFit {
  double slope = 0.0;      // [m/s]
  double intercept = 0.0;  // [m] at t = 0
};

inline LinearFit fit_line(const std::vector<double>& t, const std::vector<double>& x) {
  const std::size_t n = t.size();
  double st = 0, sx = 0, stt = 0, stx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    st += t[i];
    sx += x[i];
    stt += t[i] * t[i];
    stx += t[i] * x[i];
  }
  const double den = n * stt - st * st;
  LinearFit f;
  f.slope = (n * stx - st * sx) / den;
  f.intercept = (sx - f.slope * st) / n;
  return f;
}

// ---------------------------------------------------------------------------
// Linear collider: at release_time the schedule switches to the bare-guide
// potential (declared Step segments); the two clouds then counter-propagate
// in it, pass through each other (no interaction) and the record keeps the
// CM trajectories, the encounter, and the pre-encounter free-flight fits.

struct ColliderOptions {
  double dt = 1e-5;            // [s]
  double t_end;                // integration time after release [s]
  double x_begin, x_end;       // axis range for the potential [m]
  int n_grid = 1201;
  int record_stride = 10;      // record every this many steps
  double overlap_distance = 0.0;  // |xL - xR| below this counts as overlap [m]
  double max_step_fraction = 1.0 / 20.0;
};

struct TrajectoryRecord {
  std::vector<double> t;                  // [s], since release
  std::vector<double> x_left, x_right;    // CM [m]
  std::vector<double> v_left, v_right;    // CM [m/s]
  double encounter_time = std::numeric_limits<double>::quiet_NaN();
  double encounter_x = std::numeric_limits<double>::quiet_NaN();
  double overlap_time = std::numeric_limits<double>::quiet_NaN();
  LinearFit fit_left, fit_right;
  double post_fit_deviation = std::numeric_limits<double>::quiet_NaN();  // [m]
};

inline TrajectoryRecord collider_run(const Layout& layout, const Schedule& schedule,
                                     double release_time,
                                     const CloudState& left, const CloudState& right,
                                     const AtomSpecies& species,
                                     const ColliderOptions& opts) {
  const ChannelValues released = schedule.values_at(release_time);
  const PotentialCurve1D curve = potential_1d(layout, released, opts.x_begin,
                                              opts.x_end, opts.n_grid, species,
                                              release_time);
  const CubicSpline U = spline_of(curve);
  const double feat = feature_length(curve);

  auto particles_of = [](const CloudState& c) {
    return c.ensemble.empty() ? std::vector<Particle>{{c.x, c.v}} : c.ensemble;
  };
  std::vector<Particle> pl = particles_of(left), pr = particles_of(right);

  auto cm = [](const std::vector<Particle>& ps) {
    double sx = 0, sv = 0;
    for (const auto& p : ps) {
      sx += p.x;
      sv += p.v;
    }
    return std::pair<double, double>{sx / ps.size(), sv / ps.size()};
  };

  TrajectoryRecord rec;
  const int n_steps = static_cast<int>(std::llround(opts.t_end / opts.dt));
  for (int step = 0; step <= n_steps; ++step) {
    if (step % opts.record_stride == 0 || step == n_steps) {
      const auto [xl, vl] = cm(pl);
      const auto [xr, vr] = cm(pr);
      rec.t.push_back(step * opts.dt);
      rec.x_left.push_back(xl);
      rec.v_left.push_back(vl);
      rec.x_right.push_back(xr);
      rec.v_right.push_back(vr);
    }
    if (step == n_steps) break;
    verlet_step(pl, U, species.mass, opts.dt, feat, opts.max_step_fraction);
    verlet_step(pr, U, species.mass, opts.dt, feat, opts.max_step_fraction);
  }

  // Encounter: first CM crossing, interpolated between records.
  std::size_t overlap_idx = rec.t.size();
  for (std::size_t i = 1; i < rec.t.size(); ++i) {
    const double g0 = rec.x_right[i - 1] - rec.x_left[i - 1];
    const double g1 = rec.x_right[i] - rec.x_left[i];
    if (std::isnan(rec.encounter_time) && g0 > 0.0 && g1 <= 0.0) {
      const double f = g0 / (g0 - g1);
      rec.encounter_time = rec.t[i - 1] + f * (rec.t[i] - rec.t[i - 1]);
      rec.encounter_x =
          rec.x_left[i - 1] + f * (rec.x_left[i] - rec.x_left[i - 1]);
    }
    if (overlap_idx == rec.t.size() && std::abs(g1) <= opts.overlap_distance)
      overlap_idx = i;
  }
  if (overlap_idx == rec.t.size() && !std::isnan(rec.encounter_time)) {
    // zero overlap distance: overlap starts at the encounter
    for (std::size_t i = 0; i < rec.t.size(); ++i)
      if (rec.t[i] >= rec.encounter_time) {
        overlap_idx = i;
        break;
      }
  }

  // Pre-encounter linear fits on exactly the last 10 samples before overlap.
  if (overlap_idx < rec.t.size() && overlap_idx >= 10) {
    std::vector<double> ts(rec.t.begin() + overlap_idx - 10, rec.t.begin() + overlap_idx);
    std::vector<double> xl(rec.x_left.begin() + overlap_idx - 10,
                           rec.x_left.begin() + overlap_idx);
    std::vector<double> xr(rec.x_right.begin() + overlap_idx - 10,
                           rec.x_right.begin() + overlap_idx);
    rec.fit_left = fit_line(ts, xl);
    rec.fit_right = fit_line(ts, xr);
    rec.overlap_time = rec.t[overlap_idx];

    // Deviation from the extrapolated fits once the clouds separate again.
    std::size_t post = overlap_idx;
    while (post < rec.t.size() &&
           std::abs(rec.x_right[post] - rec.x_left[post]) <= opts.overlap_distance)
      ++post;
    double dev = 0.0;
    const std::size_t post_end = std::min(rec.t.size(), post + 10);
    for (std::size_t i = post; i < post_end; ++i) {
      dev = std::max(dev, std::abs(rec.x_left[i] - (rec.fit_left.intercept +
                                                    rec.fit_left.slope * rec.t[i])));
      dev = std::max(dev, std::abs(rec.x_right[i] - (rec.fit_right.intercept +
                                                     rec.fit_right.slope * rec.t[i])));
    }
    if (post < rec.t.size()) rec.post_fit_deviation = dev;
  }
  return rec;
}

inline std::string trajectory_to_csv(const TrajectoryRecord& rec) {
  std::ostringstream os;
  os.precision(12);
  os << "t_ms,x_left_um,x_right_um\n";
  for (std::size_t i = 0; i < rec.t.size(); ++i)
    os << s_to_ms(rec.t[i]) << "," << m_to_um(rec.x_left[i]) << ","
       << m_to_um(rec.x_right[i]) << "\n";
  return os.str();
}

inline std::string trajectory_summary_json(const TrajectoryRecord& rec,
                                           std::optional<std::uint64_t> seed = {}) {
  nlohmann::json j;
  j["format_version"] = "1.0";
  j["encounter_t_ms"] = s_to_ms(rec.encounter_time);
  j["encounter_x_um"] = m_to_um(rec.encounter_x);
  j["fit_left"] = {{"slope_um_per_ms", rec.fit_left.slope * 1e3},
                   {"intercept_um", m_to_um(rec.fit_left.intercept)}};
  j["fit_right"] = {{"slope_um_per_ms", rec.fit_right.slope * 1e3},
                    {"intercept_um", m_to_um(rec.fit_right.intercept)}};
  j["post_fit_deviation_um"] = m_to_um(rec.post_fit_deviation);
  if (seed) j["seed"] = *seed;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Conveyor transport: track every local minimum of U(x, t) by continuation
// while the schedule runs.

struct TransportOptions {
  double x_begin, x_end;          // tracked region [m]
  int n_scan = 241;               // initial well scan resolution
  double search_halfwidth = 60e-6;  // per-step 1D search window [m]
  double barrier_scan = 120e-6;   // how far to look for the enclosing barriers [m]
};

struct WellTrack {
  std::vector<double> t;      // [s]
  std::vector<double> x;      // [m]
  std::vector<double> U;      // [J] at the minimum
  std::vector<double> depth;  // [J] to the lower enclosing barrier
  bool alive = true;
  std::string event;          // "lost"/"merged" when no longer alive
};

struct ConveyorRecord {
  std::vector<WellTrack> wells;
  double mean_width = 0.0;  // harmonic well width averaged over wells [m]
};

namespace dynamics_detail {

// U(x) = mu * Bmin in the transverse slice at x; the transverse seed is kept
// per well and follows the minimum (continuation in x and t).
struct SliceCache {
  Eigen::Vector2d yz;
};

inline double slice_U(const Layout& layout, const ChannelValues& values, double x,
                      SliceCache& cache, const AtomSpecies& species) {
  cache.yz = transverse_minimum(layout, x, cache.yz, values);
  const Vec3 p(x, cache.yz[0], cache.yz[1]);
  double u = species.magnetic_moment() * field_total(layout, p, values).norm();
  if (layout.include_gravity()) u += species.mass * constants::g_earth * p.z();
  return u;
}

inline double golden_min_1d(const std::function<double(double)>& f, double lo,
                            double hi, double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 > f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dynamics_detail

inline ConveyorRecord conveyor_transport(const Layout& layout, const Schedule& schedule,
                                         double duration, double dt,
                                         const AtomSpecies& species,
                                         const TransportOptions& opts) {
  if (dt > 1e-3) throw InvalidParams("conveyor tracking needs dt <= 1 ms");
  ConveyorRecord rec;

  // Initial wells from a scan of U(x, 0).
  const PotentialCurve1D u0 =
      potential_1d(layout, schedule.values_at(0.0), opts.x_begin, opts.x_end,
                   opts.n_scan, species, 0.0);
  std::vector<double> xs;
  for (std::size_t i = 1; i + 1 < u0.x.size(); ++i)
    if (u0.U[i] < u0.U[i - 1] && u0.U[i] < u0.U[i + 1]) xs.push_back(u0.x[i]);
  rec.wells.resize(xs.size());

  const QuadParams q = quad_params(layout);
  std::vector<dynamics_detail::SliceCache> caches(xs.size(),
                                                  {Eigen::Vector2d(0.0, q.z0)});

  double width_sum = 0.0;
  std::size_t width_count = 0;
  const int n_steps = static_cast<int>(std::llround(duration / dt));
  for (int step = 0; step <= n_steps; ++step) {
    const double t = std::min(step * dt, duration);
    const ChannelValues values = schedule.values_at(t);
    for (std::size_t w = 0; w < rec.wells.size(); ++w) {
      auto& track = rec.wells[w];
      if (!track.alive) continue;
      auto U = [&](double x) {
        return dynamics_detail::slice_U(layout, values, x, caches[w], species);
      };
      double x_new;
      try {
        x_new = dynamics_detail::golden_min_1d(U, xs[w] - opts.search_halfwidth,
                                               xs[w] + opts.search_halfwidth, 1e-9);
      } catch (const Error&) {
        track.alive = false;
        track.event = "lost";
        continue;
      }
      // A minimum pinned to the search edge means the well escaped the window.
      if (std::abs(x_new - (xs[w] - opts.search_halfwidth)) < 2e-9 ||
          std::abs(x_new - (xs[w] + opts.search_halfwidth)) < 2e-9) {
        track.alive = false;
        track.event = "lost";
        continue;
      }
      xs[w] = x_new;
      const double u_min = U(x_new);

      // Enclosing barriers by coarse scan away from the minimum.
      double bl = u_min, br = u_min;
      for (int k = 1; k <= 12; ++k) {
        const double d = opts.barrier_scan * k / 12.0;
        try {
          bl = std::max(bl, U(x_new - d));
        } catch (const Error&) { break; }
      }
      for (int k = 1; k <= 12; ++k) {
        const double d = opts.barrier_scan * k / 12.0;
        try {
          br = std::max(br, U(x_new + d));
        } catch (const Error&) { break; }
      }
      track.t.push_back(t);
      track.x.push_back(x_new);
      track.U.push_back(u_min);
      track.depth.push_back(std::min(bl, br) - u_min);

      if (step == 0) {
        const double h = 2e-6;
        const double upp = (U(x_new + h) - 2 * u_min + U(x_new - h)) / (h * h);
        if (upp > 0 && track.depth.back() > 0) {
          width_sum += std::sqrt(2.0 * track.depth.back() / upp);
          ++width_count;
        }
      }
    }
    // merge wells that collapsed onto each other
    for (std::size_t a = 0; a < rec.wells.size(); ++a)
      for (std::size_t b = a + 1; b < rec.wells.size(); ++b)
        if (rec.wells[a].alive && rec.wells[b].alive &&
            std::abs(xs[a] - xs[b]) < 1e-6) {
          rec.wells[b].alive = false;
          rec.wells[b].event = "merged";
        }
  }
  if (width_count > 0) rec.mean_width = width_sum / width_count;
  return rec;
}

inline std::string conveyor_to_csv(const ConveyorRecord& rec) {
  std::ostringstream os;
  os.precision(12);
  os << "well,t_ms,x_um,U_over_kB_uK,depth_over_kB_uK\n";
  for (std::size_t w = 0; w < rec.wells.size(); ++w) {
    const auto& track = rec.wells[w];
    for (std::size_t i = 0; i < track.t.size(); ++i)
      os << w << "," << s_to_ms(track.t[i]) << "," << m_to_um(track.x[i]) << ","
         << track.U[i] / constants::k_boltzmann * 1e6 << ","
         << track.depth[i] / constants::k_boltzmann * 1e6 << "\n";
  }
  return os.str();
}

}  // namespace microtrap
