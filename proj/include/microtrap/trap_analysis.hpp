#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "microtrap/field.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/species.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// Trap characterization at a located field minimum. kappa are the
// eigenvalues of the Hessian of |B| sorted descending, axes the matching
// orthonormal eigenvectors (columns).
struct TrapReport {
  Vec3 r_min = Vec3::Zero();          // [m]
  double B_min = 0.0;                 // [T]
  std::array<double, 3> kappa{};      // [T/m^2]
  Mat3 axes = Mat3::Identity();
  std::array<double, 3> nu{};         // [Hz], NaN where kappa <= 0
  std::array<double, 3> eta{};        // Lamb-Dicke, NaN where undefined
  std::optional<double> depth;        // [T], box-boundary proxy
  bool saddle = false;                // any kappa < 0
  std::string species;
};

struct MinimizeOptions {
  double grad_tol = 1e-10;      // on |grad |B|^2| [T^2/m]
  double step_tol = 1e-9;       // [m]
  int max_iterations = 200;
  double box_half = 10e-3;      // sanity box around the seed [m]
  // Relative gradient floor: at a minimum with nonzero |B| the descent on
  // |B|^2 stalls when true decrements drop below the roundoff jitter of f,
  // around |g| ~ 1e-8 * (2 |J| |B|); anything below this is converged no
  // matter what the absolute tolerance asks for.
  double grad_rel = 1e-8;
};

namespace analysis_detail {

// Damped Gauss-Newton on f = |B|^2 (grad f = 2 J^T B, H ~ 2 J^T J) with
// Levenberg damping. Converged when the gradient is below grad_tol and the
// last accepted step below step_tol; a descent stall with a small gradient
// also counts (the minimum has been resolved to the numeric floor).
template <int Dim, typename FieldAt, typename EscapeCheck>
Eigen::Matrix<double, Dim, 1> lm_minimize(FieldAt&& sample,
                                          Eigen::Matrix<double, Dim, 1> r,
                                          const MinimizeOptions& opts,
                                          EscapeCheck&& escaped,
                                          const char* what) {
  using VecD = Eigen::Matrix<double, Dim, 1>;
  using MatD = Eigen::Matrix<double, Dim, Dim>;
  double lambda = 1e-3;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::Matrix<double, 3, 1> B;
    Eigen::Matrix<double, 3, Dim> J;
    sample(r, B, J);
    const double f = B.squaredNorm();
    const VecD g = 2.0 * J.transpose() * B;
    const double g_tol =
        std::max(opts.grad_tol, opts.grad_rel * 2.0 * J.norm() * B.norm());
    if (g.norm() < g_tol && last_step < opts.step_tol) return r;
    const MatD H = 2.0 * J.transpose() * J;
    const double scale = std::max(H.trace() / Dim, 1e-300);

    // Newton localization bound: once the undamped step estimate drops well
    // below the position tolerance the minimum is resolved, whatever the
    // numeric floor of f and g happens to be. Kept far below step_tol so that
    // quadrupole zeros still refine deep enough for |B| to fall under the
    // zero-field threshold.
    {
      MatD Hr = H;
      Hr.diagonal().array() += 1e-12 * scale;
      const VecD newton = Eigen::LDLT<MatD>(Hr).solve(-g);
      if (newton.allFinite() && newton.norm() < 1e-3 * opts.step_tol) return r;
    }

    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      MatD Hd = H;
      Hd.diagonal().array() += lambda * scale;
      const VecD step = Eigen::LDLT<MatD>(Hd).solve(-g);
      if (step.allFinite()) {
        Eigen::Matrix<double, 3, 1> Bn;
        Eigen::Matrix<double, 3, Dim> Jn;
        sample(VecD(r + step), Bn, Jn);
        if (Bn.squaredNorm() <= f) {
          r += step;
          last_step = step.norm();
          lambda = std::max(lambda / 3.0, 1e-14);
          accepted = true;
          break;
        }
      }
      lambda = std::max(lambda * 10.0, 1e-6);
    }
    if (!accepted) {
      if (g.norm() < g_tol) return r;  // descent floor at the minimum
      throw NoConvergence(std::string(what) + ": stalled away from a minimum");
    }
    if (escaped(r)) throw EscapedDomain(std::string(what) + ": left the sanity box");
  }
  throw NoConvergence(std::string(what) + ": no convergence within iteration cap");
}

}  // namespace analysis_detail

// Minimize |B|^2 by damped Newton (Gauss-Newton Hessian, Levenberg damping)
// from a seed. |B| itself is not differentiable at quadrupole zeros, |B|^2 is
// smooth everywhere.
inline Vec3 find_minimum(const Layout& layout, const Vec3& seed,
                         const ChannelValues& values = {},
                         const MinimizeOptions& opts = {}) {
  auto sample = [&](const Vec3& q, Eigen::Matrix<double, 3, 1>& B,
                    Eigen::Matrix<double, 3, 3>& J) {
    B = field_total(layout, q, values);
    J = jacobian(layout, q, values);
  };
  auto escaped = [&](const Vec3& r) {
    return (r - seed).cwiseAbs().maxCoeff() > opts.box_half;
  };
  return analysis_detail::lm_minimize<3>(sample, Vec3(seed), opts, escaped,
                                         "find_minimum");
}

// Transverse (y,z) minimization at fixed x.
inline Eigen::Vector2d transverse_minimum(const Layout& layout, double x,
                                          const Eigen::Vector2d& seed_yz,
                                          const ChannelValues& values = {},
                                          const MinimizeOptions& opts = {}) {
  auto sample = [&](const Eigen::Vector2d& q, Eigen::Matrix<double, 3, 1>& B,
                    Eigen::Matrix<double, 3, 2>& J) {
    const Vec3 p(x, q[0], q[1]);
    B = field_total(layout, p, values);
    J = jacobian(layout, p, values).rightCols<2>();
  };
  auto escaped = [&](const Eigen::Vector2d& r) {
    return (r - seed_yz).cwiseAbs().maxCoeff() > opts.box_half;
  };
  return analysis_detail::lm_minimize<2>(sample, Eigen::Vector2d(seed_yz), opts,
                                         escaped, "transverse_minimum");
}

// Side-guide quadrupole parameters: height of the field zero above the guide
// wire and the transverse gradient,
//   z0 = (mu0/2pi) I0 / B0y,   b = B0y / z0 = (2pi/mu0) B0y^2 / I0,
// cross-checked against the located transverse minimum.
struct QuadParams {
  double z0;          // [m], from the relation above, measured from the wire
  double b;           // [T/m]
  double z0_located;  // [m], from the located transverse field minimum
  double I0;          // [A]
  double B0y;         // [T]
  double wire_z;      // [m], height of the guide filament plane
};

inline QuadParams quad_params(const Layout& layout, const Vec3& axis = Vec3::UnitX()) {
  // Dominant guide = conductor with the largest |I| * (length along the axis).
  double best_score = 0.0;
  const Conductor* guide = nullptr;
  for (const auto& c : layout.conductors()) {
    double along = 0.0;
    for (std::size_t k = 0; k + 1 < c.path.size(); ++k) {
      const Vec3 d = c.path[k + 1] - c.path[k];
      along += std::abs(d.dot(axis));
    }
    const double score = std::abs(c.current) * along;
    if (score > best_score) {
      best_score = score;
      guide = &c;
    }
  }
  if (!guide) throw NoGuide("no conductor with current along the guide axis");

  const Vec3 perp_h = Vec3::UnitZ().cross(axis).normalized();
  const double B0y = std::abs(layout.bias().dot(perp_h));
  if (B0y <= 0.0) throw NoGuide("no transverse bias component");

  QuadParams q;
  q.I0 = std::abs(guide->current);
  q.B0y = B0y;
  q.z0 = constants::mu0_over_2pi * q.I0 / B0y;
  q.b = B0y / q.z0;

  // Locate the actual transverse minimum above the guide's axial midpoint.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  Vec3 mid_perp = Vec3::Zero();
  for (const auto& p : guide->path) {
    lo = std::min(lo, p.dot(axis));
    hi = std::max(hi, p.dot(axis));
  }
  mid_perp = 0.5 * (guide->path.front() + guide->path.back());
  q.wire_z = guide->cross_section && guide->model == ConductorModel::Thin
                 ? 0.5 * guide->cross_section->height
                 : 0.0;
  const double x_mid = 0.5 * (lo + hi);
  const double y_wire = mid_perp.dot(perp_h);
  try {
    const Eigen::Vector2d yz = transverse_minimum(
        layout, x_mid, Eigen::Vector2d(y_wire, q.wire_z + q.z0));
    q.z0_located = yz[1] - q.wire_z;
  } catch (const Error&) {
    throw NoGuide("no transverse field minimum found above the guide");
  }
  return q;
}

// Exact per-slice minima along the guide together with the closed-form
// approximation: B_min(x) ~ |B_x(x, y_g, z0)| on the unshifted quadrupole
// line, minimum displaced by (-Bz/b, -By/b) in (y, z). (The side-guide
// quadrupole is B = (0, b(z-z0), b y) for a positive-b guide, so a uniform
// extra component shifts the zero against it on both transverse axes.)
struct LongitudinalProfile {
  std::vector<double> x;            // [m]
  std::vector<double> exact_Bmin;   // [T]
  std::vector<Vec3> exact_pos;      // [m]
  std::vector<double> approx_Bmin;  // [T]
  std::vector<double> approx_y;     // [m]
  std::vector<double> approx_z;     // [m]
  double z0 = 0.0;                  // [m]
  double b = 0.0;                   // [T/m]
};

inline LongitudinalProfile longitudinal_profile(const Layout& layout, double x_begin,
                                                double x_end, int n_slices,
                                                const ChannelValues& values = {}) {
  if (n_slices < 2) throw InvalidParams("profile needs at least 2 slices");
  const QuadParams q = quad_params(layout);

  LongitudinalProfile prof;
  prof.z0 = q.z0;
  prof.b = q.b;

  // The approximation anchors to the unshifted quadrupole line of the bare
  // guide, not to the located slice minimum (which other field sources move).
  const double line_z = q.wire_z + q.z0;
  Eigen::Vector2d seed(0.0, q.wire_z + q.z0_located);
  double last_good = x_begin;
  for (int i = 0; i < n_slices; ++i) {
    const double x = x_begin + (x_end - x_begin) * i / (n_slices - 1);
    Eigen::Vector2d yz;
    try {
      yz = transverse_minimum(layout, x, seed, values);
    } catch (const Error& e) {
      throw SliceLost(std::string("longitudinal profile lost the minimum: ") + e.what(),
                      last_good);
    }
    seed = yz;  // continuation to the next slice
    last_good = x;
    const Vec3 pos(x, yz[0], yz[1]);
    prof.x.push_back(x);
    prof.exact_pos.push_back(pos);
    prof.exact_Bmin.push_back(field_total(layout, pos, values).norm());

    const Vec3 on_line = field_total(layout, Vec3(x, 0.0, line_z), values);
    prof.approx_Bmin.push_back(std::abs(on_line.x()));
    prof.approx_y.push_back(-on_line.z() / q.b);
    prof.approx_z.push_back(line_z - on_line.y() / q.b);
  }
  return prof;
}

inline std::string profile_to_csv(const LongitudinalProfile& prof) {
  std::ostringstream os;
  os.precision(12);
  os << "x_um,Bmin_exact_G,Bmin_approx_G,y_min_um,z_min_um\n";
  for (std::size_t i = 0; i < prof.x.size(); ++i) {
    os << m_to_um(prof.x[i]) << "," << tesla_to_gauss(prof.exact_Bmin[i]) << ","
       << tesla_to_gauss(prof.approx_Bmin[i]) << "," << m_to_um(prof.exact_pos[i].y())
       << "," << m_to_um(prof.exact_pos[i].z()) << "\n";
  }
  return os.str();
}

struct CharacterizeOptions {
  HessianOptions hessian;
  std::optional<Vec3> depth_box_half;  // box half-extents around r_min [m]
  int depth_face_samples = 21;
};

inline TrapReport characterize(const Layout& layout, const Vec3& r_min,
                               const AtomSpecies& species,
                               const ChannelValues& values = {},
                               const CharacterizeOptions& opts = {}) {
  TrapReport rep;
  rep.r_min = r_min;
  rep.species = species.name;
  rep.B_min = field_total(layout, r_min, values).norm();
  if (rep.B_min < kZeroFieldThreshold)
    throw ZeroFieldRegion("B_min below threshold; curvatures of |B| undefined");

  const Mat3 H = norm_hessian(layout, r_min, values, opts.hessian);
  Eigen::SelfAdjointEigenSolver<Mat3> eig(H);
  // descending
  for (int i = 0; i < 3; ++i) {
    rep.kappa[i] = eig.eigenvalues()[2 - i];
    rep.axes.col(i) = eig.eigenvectors().col(2 - i);
  }

  const double mu = species.magnetic_moment();
  const double nur = species.recoil_frequency();
  for (int i = 0; i < 3; ++i) {
    if (rep.kappa[i] > 0.0) {
      rep.nu[i] = std::sqrt(mu * rep.kappa[i] / species.mass) / (2.0 * constants::pi);
      rep.eta[i] = std::sqrt(nur / rep.nu[i]);
    } else {
      rep.saddle = true;
      rep.nu[i] = std::numeric_limits<double>::quiet_NaN();
      rep.eta[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }

  if (opts.depth_box_half) {
    const Vec3 h = *opts.depth_box_half;
    double face_min = std::numeric_limits<double>::infinity();
    const int n = std::max(2, opts.depth_face_samples);
    for (int axis = 0; axis < 3; ++axis) {
      for (int side = -1; side <= 1; side += 2) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            Vec3 p = r_min;
            p[axis] += side * h[axis];
            p[u] += h[u] * (2.0 * i / (n - 1) - 1.0);
            p[v] += h[v] * (2.0 * j / (n - 1) - 1.0);
            face_min = std::min(face_min, field_total(layout, p, values).norm());
          }
        }
      }
    }
    rep.depth = face_min - rep.B_min;
  }
  return rep;
}

// Builds the frequency/Lamb-Dicke part of a report from given curvatures,
// nu_i = (1/2pi) sqrt(mu kappa_i / m) and eta_i = sqrt(nu_r / nu_i).
// Used when curvatures come from elsewhere (tables, overrides).
inline TrapReport report_from_curvatures(const std::array<double, 3>& kappa,
                                         const AtomSpecies& species,
                                         double B_min = 0.0) {
  TrapReport rep;
  rep.species = species.name;
  rep.B_min = B_min;
  rep.kappa = kappa;
  std::sort(rep.kappa.begin(), rep.kappa.end(), std::greater<>());
  const double mu = species.magnetic_moment();
  const double nur = species.recoil_frequency();
  for (int i = 0; i < 3; ++i) {
    if (rep.kappa[i] > 0.0) {
      rep.nu[i] = std::sqrt(mu * rep.kappa[i] / species.mass) / (2.0 * constants::pi);
      rep.eta[i] = std::sqrt(nur / rep.nu[i]);
    } else {
      rep.saddle = true;
      rep.nu[i] = std::numeric_limits<double>::quiet_NaN();
      rep.eta[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rep;
}

inline std::string report_to_json(const TrapReport& rep) {
  nlohmann::json j;
  j["format_version"] = "1.0";
  j["species"] = rep.species;
  j["r_min_um"] = {m_to_um(rep.r_min.x()), m_to_um(rep.r_min.y()), m_to_um(rep.r_min.z())};
  j["B_min_G"] = tesla_to_gauss(rep.B_min);
  j["kappa_G_per_cm2"] = {tesla_per_m2_to_gauss_per_cm2(rep.kappa[0]),
                          tesla_per_m2_to_gauss_per_cm2(rep.kappa[1]),
                          tesla_per_m2_to_gauss_per_cm2(rep.kappa[2])};
  nlohmann::json axes = nlohmann::json::array();
  for (int i = 0; i < 3; ++i)
    axes.push_back({rep.axes(0, i), rep.axes(1, i), rep.axes(2, i)});
  j["axes"] = std::move(axes);
  auto hz_to_khz = [](double v) { return v * 1e-3; };
  j["nu_kHz"] = {hz_to_khz(rep.nu[0]), hz_to_khz(rep.nu[1]), hz_to_khz(rep.nu[2])};
  j["eta"] = {rep.eta[0], rep.eta[1], rep.eta[2]};
  if (rep.depth) j["depth_G"] = tesla_to_gauss(*rep.depth);
  else j["depth_G"] = nullptr;
  j["saddle"] = rep.saddle;
  return j.dump(2);
}

// Axial bias recommendation against Majorana spin flips: choose B0 so that
// the Larmor precession rate exceeds the transverse oscillation rate by the
// factor c,  mu B0 / hbar = c * b * sqrt(mu / (m B0)),  giving
//   B0 = (c^2 b^2 hbar^2 / (mu m))^(1/3).
struct AdiabaticityResult {
  double B0;             // [T]
  double nu_transverse;  // [Hz] at that bias
  double ratio;          // omega_prec / omega_osc (= c by construction)
};

inline AdiabaticityResult adiabaticity(double b, const AtomSpecies& species,
                                       double c = 10.0) {
  if (!(b > 0.0)) throw InvalidParams("adiabaticity needs a positive gradient");
  const double mu = species.magnetic_moment();
  const double m = species.mass;
  const double B0 =
      std::cbrt(c * c * b * b * constants::hbar * constants::hbar / (mu * m));
  const double omega_osc = b * std::sqrt(mu / (m * B0));
  const double omega_prec = mu * B0 / constants::hbar;
  return {B0, omega_osc / (2.0 * constants::pi), omega_prec / omega_osc};
}

// 1/e^2 diameter of the harmonic-oscillator ground state at frequency nu.
inline double ground_state_diameter(double nu, const AtomSpecies& species) {
  return 2.0 * std::sqrt(2.0) *
         std::sqrt(constants::hbar / (species.mass * 2.0 * constants::pi * nu));
}

}  // namespace microtrap
