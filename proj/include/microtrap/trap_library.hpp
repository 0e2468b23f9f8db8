#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "microtrap/errors.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/schedule.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// Builders emit finite polyline conductors (realizable chips) rather than
// infinite wires; analytic tests can still assemble InfiniteWire layouts by
// hand. Default straight sections extend +-10 mm.
inline constexpr double kDefaultHalfLength = 10e-3;  // [m]

namespace library_detail {

inline Conductor straight_x(double current, const std::string& label,
                            double half_length = kDefaultHalfLength) {
  return Conductor{{Vec3(-half_length, 0, 0), Vec3(half_length, 0, 0)},
                   current, std::nullopt, ConductorModel::Thin, 1, 1, label};
}

inline Conductor crossing_y(double x, double current, const std::string& label,
                            double half_length = kDefaultHalfLength) {
  return Conductor{{Vec3(x, -half_length, 0), Vec3(x, half_length, 0)},
                   current, std::nullopt, ConductorModel::Thin, 1, 1, label};
}

}  // namespace library_detail

// ---------------------------------------------------------------------------
// Side guide: straight wire along x plus a perpendicular bias canceling its
// field on the line at height z0, with B0y = (mu0/2pi) I / z0 (2 G per A at
// 1 mm) and transverse gradient b = B0y / z0.

struct SideGuide {
  Layout layout;
  double z0;  // [m]
  double b;   // [T/m]
};

inline SideGuide make_side_guide(double current, std::optional<double> B0y,
                                 std::optional<double> z0,
                                 double half_length = kDefaultHalfLength) {
  if (B0y.has_value() == z0.has_value())
    throw InvalidParams("side guide needs exactly one of B0y or z0");
  if (current == 0.0) throw InvalidParams("side guide needs a nonzero current");
  const double I = std::abs(current);
  double bias_y, height;
  if (z0) {
    if (*z0 <= 0) throw InvalidParams("z0 must be positive");
    height = *z0;
    bias_y = constants::mu0_over_2pi * I / height;
  } else {
    if (*B0y <= 0) throw InvalidParams("B0y must be positive");
    bias_y = *B0y;
    height = constants::mu0_over_2pi * I / bias_y;
  }
  // current +x with bias +y puts the zero above the plane
  Layout layout({library_detail::straight_x(I, "guide", half_length)}, {},
                Vec3(0, bias_y, 0));
  return {std::move(layout), height, bias_y / height};
}

// ---------------------------------------------------------------------------
// Wire intersection: a crossing current modulates the field along the guide.
// Its on-axis contribution (mu0/2pi) I1 z0 / (x^2 + z0^2) repels on its own
// and traps when an axial bias larger than the peak opposes it.

enum class IntersectionKind { Trap, Repulsive };

struct CrossingTrap {
  Layout layout;
  IntersectionKind kind;
  double z0;         // [m]
  double b;          // [T/m]
  double barrier;    // on-axis crossing-field peak [T]
};

inline double crossing_peak(double I1, double z0) {
  return constants::mu0_over_2pi * std::abs(I1) / z0;
}

inline CrossingTrap make_crossing_trap(double I0, double I1, double B0y, double B0x,
                                       double half_length = kDefaultHalfLength) {
  if (I0 == 0.0 || B0y <= 0.0) throw InvalidParams("crossing trap needs I0 != 0, B0y > 0");
  const double z0 = constants::mu0_over_2pi * std::abs(I0) / B0y;
  const double peak = crossing_peak(I1, z0);
  // The crossing current is oriented so its axial field opposes B0x; the
  // field modulus then depends only on |B0x| and the trap/barrier character
  // is decided by |B0x| vs the peak.
  const double sign = B0x != 0.0 ? -(B0x > 0 ? 1.0 : -1.0) : 1.0;
  std::vector<Conductor> conductors{
      library_detail::straight_x(std::abs(I0), "guide", half_length),
      library_detail::crossing_y(0.0, sign * std::abs(I1), "crossing", half_length)};
  Layout layout(std::move(conductors), {}, Vec3(B0x, B0y, 0));
  const auto kind =
      std::abs(B0x) > peak ? IntersectionKind::Trap : IntersectionKind::Repulsive;
  return {std::move(layout), kind, z0, B0y / z0, peak};
}

// ---------------------------------------------------------------------------
// "H" trap: two parallel crossing wires a distance d apart. Without axial
// bias a single trap forms between them; with it, one trap above each
// intersection.

struct HTrap {
  Layout layout;
  double z0;
  double b;
};

inline HTrap make_H_trap(double I0, double I1, double I2, double d, double B0y,
                         double B0x, double half_length = kDefaultHalfLength) {
  if (d <= 0.0) throw InvalidParams("H trap needs a positive spacing");
  if (I0 == 0.0 || B0y <= 0.0) throw InvalidParams("H trap needs I0 != 0, B0y > 0");
  const double z0 = constants::mu0_over_2pi * std::abs(I0) / B0y;
  const double sign = B0x != 0.0 ? -(B0x > 0 ? 1.0 : -1.0) : 1.0;
  std::vector<Conductor> conductors{
      library_detail::straight_x(std::abs(I0), "guide", half_length),
      library_detail::crossing_y(-0.5 * d, sign * std::abs(I1), "crossing_1", half_length),
      library_detail::crossing_y(+0.5 * d, sign * std::abs(I2), "crossing_2", half_length)};
  Layout layout(std::move(conductors), {}, Vec3(B0x, B0y, 0));
  return {std::move(layout), z0, B0y / z0};
}

// ---------------------------------------------------------------------------
// Optimal crossing spacing: place two same-direction crossing wires at +-a
// and maximize the curvature of their summed axial field at the midpoint,
//   d^2/dx^2 [sum] (0) = (mu0 I1 / pi) * 2 z0 (3a^2 - z0^2) / (a^2 + z0^2)^3,
// which peaks at a = z0. The signed curvature is the objective: the modulus
// is largest near a -> 0 where the midpoint is a barrier, not a trap.

inline double spacing_curvature(double a, double I1, double z0) {
  const double u = a * a + z0 * z0;
  return (constants::mu0 * I1 / constants::pi) * 2.0 * z0 *
         (3.0 * a * a - z0 * z0) / (u * u * u);
}

inline double optimize_spacing(double I0, double I1, double B0y) {
  if (I0 == 0.0 || I1 == 0.0 || B0y <= 0.0)
    throw InvalidParams("spacing search needs nonzero currents and B0y > 0");
  const double z0 = constants::mu0_over_2pi * std::abs(I0) / B0y;
  const double I = std::abs(I1);
  // golden-section maximization on (0, 10 z0]
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 1e-3 * z0, hi = 10.0 * z0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = spacing_curvature(x1, I, z0);
  double f2 = spacing_curvature(x2, I, z0);
  while (hi - lo > 1e-9 * z0) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = spacing_curvature(x2, I, z0);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = spacing_curvature(x1, I, z0);
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Four-wire trap: crossings at x = -z0 (I1) and +z0 (I3) plus an opposed
// center current I2. The center field vanishes when |I2| = (I1+I3)/2, so that
// is the hard limit for a nonzero minimum.

struct FourWire {
  Layout layout;
  double z0;
  double b;
  double predicted_Bmin;  // on-axis estimate (mu0/2pi z0)((I1+I3)/2 - |I2|) + |B0x| effects
};

inline FourWire make_four_wire(double I0, double I1, double I2, double I3, double B0y,
                               double B0x = 0.0,
                               double half_length = kDefaultHalfLength) {
  if (I0 == 0.0 || B0y <= 0.0) throw InvalidParams("four-wire trap needs I0 != 0, B0y > 0");
  if (I1 < 0 || I3 < 0) throw InvalidParams("outer crossing currents must be >= 0");
  const double z0 = constants::mu0_over_2pi * std::abs(I0) / B0y;
  if (std::abs(I2) >= 0.5 * (I1 + I3))
    throw FieldZeroRisk("|I2| >= (I1+I3)/2 pulls the field minimum to zero");
  std::vector<Conductor> conductors{
      library_detail::straight_x(std::abs(I0), "guide", half_length),
      library_detail::crossing_y(-z0, I1, "crossing_1", half_length),
      library_detail::crossing_y(0.0, -std::abs(I2), "center", half_length),
      library_detail::crossing_y(+z0, I3, "crossing_3", half_length)};
  Layout layout(std::move(conductors), {}, Vec3(B0x, B0y, 0));
  const double bmin =
      (constants::mu0_over_2pi / z0) * (0.5 * (I1 + I3) - std::abs(I2)) + B0x;
  return {std::move(layout), z0, B0y / z0, bmin};
}

// ---------------------------------------------------------------------------
// Rotatable cross. Two bent conductors crossing at the origin; exchanging
// currents and bias components turns the long trap axis by 90 degrees, and
// interpolating the parameters rotates it continuously.

struct RotationState {
  double theta_deg;
  double I1;   // conductor along x [A]
  double I2;   // conductor along y [A]
  double B0x;  // [T]
  double B0y;  // [T]
};

// Endpoints: the 90-degree state as published, the 0-degree state with the
// roles exchanged (magnitudes swapped, per-role signs preserved so both
// endpoints trap above the substrate and the crossing stays attractive).
inline RotationState rotation_state_0() {
  return {0.0, 1.2, -0.2, gauss_to_tesla(4.0), gauss_to_tesla(10.0)};
}
inline RotationState rotation_state_90() {
  return {90.0, 0.2, -1.2, gauss_to_tesla(10.0), gauss_to_tesla(4.0)};
}

// cos^2 interpolation between the endpoint parameter sets.
inline RotationState rotation_state(double theta_deg) {
  const RotationState a = rotation_state_0();
  const RotationState b = rotation_state_90();
  const double u = theta_deg / 90.0;
  const double c = std::cos(0.5 * constants::pi * u);
  const double w = c * c;
  auto mix = [&](double va, double vb) { return w * va + (1.0 - w) * vb; };
  return {theta_deg, mix(a.I1, b.I1), mix(a.I2, b.I2), mix(a.B0x, b.B0x),
          mix(a.B0y, b.B0y)};
}

inline std::vector<RotationState> make_rotation_schedule(int steps) {
  if (steps < 2) throw InvalidParams("rotation schedule needs at least 2 steps");
  std::vector<RotationState> states;
  states.reserve(steps);
  for (int i = 0; i < steps; ++i)
    states.push_back(rotation_state(90.0 * i / (steps - 1)));
  return states;
}

struct RotatableGeometry {
  double arm = 2e-3;     // half-length of the straight section [m]
  double lead_a = 2e-3;  // bent lead length, conductor along x [m]
  double lead_b = 2e-3;  // bent lead length, conductor along y [m]
};

// With lead_a == lead_b the two conductors are exact mirror images under the
// x <-> y swap, so exchanging (I1, B0x) with (I2, B0y) mirrors |B| exactly.
inline Layout make_rotatable_cross(const RotationState& state,
                                   const RotatableGeometry& geom = {}) {
  const double L = geom.arm;
  Conductor a{{Vec3(-L, -geom.lead_a, 0), Vec3(-L, 0, 0), Vec3(L, 0, 0),
               Vec3(L, geom.lead_a, 0)},
              state.I1, std::nullopt, ConductorModel::Thin, 1, 1, "wire_a"};
  Conductor b{{Vec3(-geom.lead_b, -L, 0), Vec3(0, -L, 0), Vec3(0, L, 0),
               Vec3(geom.lead_b, L, 0)},
              state.I2, std::nullopt, ConductorModel::Thin, 1, 1, "wire_b"};
  std::map<std::string, ChannelBinding> channels{
      {"I1", {{"wire_a"}, {}}},
      {"I2", {{"wire_b"}, {}}},
      {"BX", {{}, {0}}},
      {"BY", {{}, {1}}},
  };
  return Layout({std::move(a), std::move(b)}, {}, Vec3(state.B0x, state.B0y, 0),
                std::move(channels));
}

// ---------------------------------------------------------------------------
// Elongated Z guide: long central section with parallel end sections whose
// field supplies the small axial component that keeps the minimum nonzero.

struct ElongatedZ {
  Layout layout;
  double z0;
  double b;
};

inline ElongatedZ make_elongated_Z(double I0, double B0y,
                                   double central_length = 7e-3,
                                   double end_length = 10e-3) {
  if (I0 <= 0.0 || B0y <= 0.0) throw InvalidParams("elongated Z needs I0, B0y > 0");
  if (end_length < 5e-3) throw InvalidParams("end sections must be >= 5 mm");
  const double xh = 0.5 * central_length;
  Conductor z{{Vec3(-xh, -end_length, 0), Vec3(-xh, 0, 0), Vec3(xh, 0, 0),
               Vec3(xh, end_length, 0)},
              I0, std::nullopt, ConductorModel::Thin, 1, 1, "guide"};
  const double z0 = constants::mu0_over_2pi * I0 / B0y;
  Layout layout({std::move(z)}, {}, Vec3(0, B0y, 0));
  return {std::move(layout), z0, B0y / z0};
}

// ---------------------------------------------------------------------------
// Conductor electrical limits.

struct ConductorLimits {
  double width, height;          // [m]
  double resistivity;            // [Ohm m]
  double current;                // [A]
  double resistance_per_length;  // [Ohm/m]
  double power_per_length;       // [W/m]
  double current_density;        // [A/m^2]
  double j_max;                  // [A/m^2]
  bool ok;                       // current density within j_max
};

inline constexpr double kDefaultMaxCurrentDensity = 4.6e10;  // [A/m^2] = 4.6e6 A/cm^2

inline ConductorLimits conductor_limits(double width, double height, double resistivity,
                                        double current,
                                        double j_max = kDefaultMaxCurrentDensity) {
  if (width <= 0 || height <= 0 || resistivity <= 0)
    throw InvalidParams("conductor limits need positive width, height, resistivity");
  const double area = width * height;
  const double r = resistivity / area;
  const double j = std::abs(current) / area;
  return {width, height, resistivity, current, r, current * current * r, j, j_max,
          j <= j_max};
}

inline std::string limits_to_json(const ConductorLimits& lim) {
  nlohmann::json j;
  j["format_version"] = "1.0";
  j["width_um"] = m_to_um(lim.width);
  j["height_um"] = m_to_um(lim.height);
  j["resistivity_ohm_m"] = lim.resistivity;
  j["current_A"] = lim.current;
  j["R_per_cm"] = lim.resistance_per_length * 1e-2;
  j["P_per_cm"] = lim.power_per_length * 1e-2;
  j["j_A_per_cm2"] = lim.current_density * 1e-4;
  j["j_max_A_per_cm2"] = lim.j_max * 1e-4;
  j["ok"] = lim.ok;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Conveyor: a Z-shaped guide (end walls included) plus two serpentine
// modulation combs offset by half a spacing, and two holding wires near the
// chain ends. Driving M1/M2 in quadrature translates the chain of minima by
// one comb period (2 * spacing) per modulation cycle.

struct ConveyorParams {
  double I0 = 2.0;                       // guide current [A]
  double B0y = gauss_to_tesla(160.0);    // transverse bias [T]
  double B0x = gauss_to_tesla(15.0);     // axial bias, keeps well bottoms nonzero [T]
  double Im = 0.2;                       // modulation current amplitude [A]
  // Holding wires: positive current adds to the axial bias and fills the
  // local well (parks the chain), negative current digs a standalone well.
  double IH = 0.3;                       // [A]
  double spacing = 100e-6;               // crossing spacing within one comb [m]
  int crossings = 11;                    // per comb
  double serpentine_half_width = 1e-3;   // [m]
  double holding_x = 400e-6;             // holding wires at +- this (a well site) [m]
  double central_length = 7e-3;          // guide section [m]
  double end_length = 10e-3;             // guide end sections [m]
};

namespace library_detail {

inline Conductor serpentine(double x_first, double spacing, int crossings,
                            double half_width, double current, const std::string& label) {
  std::vector<Vec3> path;
  double y = -half_width;
  path.emplace_back(x_first, y, 0.0);
  for (int k = 0; k < crossings; ++k) {
    const double x = x_first + k * spacing;
    path.emplace_back(x, y, 0.0);
    y = -y;  // cross the guide, alternating direction
    path.emplace_back(x, y, 0.0);
  }
  // drop the duplicated first corner
  path.erase(path.begin());
  return Conductor{std::move(path), current, std::nullopt, ConductorModel::Thin, 1, 1,
                   label};
}

}  // namespace library_detail

inline Layout make_conveyor(const ConveyorParams& p = {}) {
  if (p.crossings < 2) throw InvalidParams("conveyor needs at least 2 crossings per comb");
  const double xh = 0.5 * p.central_length;
  Conductor guide{{Vec3(-xh, -p.end_length, 0), Vec3(-xh, 0, 0), Vec3(xh, 0, 0),
                   Vec3(xh, p.end_length, 0)},
                  p.I0, std::nullopt, ConductorModel::Thin, 1, 1, "guide"};
  const double span = (p.crossings - 1) * p.spacing;
  Conductor m1 = library_detail::serpentine(-0.5 * span, p.spacing, p.crossings,
                                            p.serpentine_half_width, p.Im, "m1");
  Conductor m2 = library_detail::serpentine(-0.5 * span + 0.5 * p.spacing, p.spacing,
                                            p.crossings, p.serpentine_half_width, p.Im,
                                            "m2");
  Conductor h1 = library_detail::crossing_y(-p.holding_x, p.IH, "h1",
                                            p.serpentine_half_width);
  Conductor h2 = library_detail::crossing_y(+p.holding_x, p.IH, "h2",
                                            p.serpentine_half_width);
  std::map<std::string, ChannelBinding> channels{
      {"I0", {{"guide"}, {}}}, {"M1", {{"m1"}, {}}}, {"M2", {{"m2"}, {}}},
      {"H1", {{"h1"}, {}}},    {"H2", {{"h2"}, {}}},
  };
  return Layout({std::move(guide), std::move(m1), std::move(m2), std::move(h1),
                 std::move(h2)},
                {}, Vec3(p.B0x, p.B0y, 0), std::move(channels));
}

// Quadrature drive for the conveyor: M1 runs cos-like (1 -> -1 -> 1), M2
// sin-like, over `cycles` periods; the other channels stay put. direction -1
// flips the M2 phase and transports the other way.
inline Schedule make_conveyor_schedule(double period, int cycles, int direction = 1) {
  if (period <= 0 || cycles < 1) throw InvalidParams("conveyor schedule needs period > 0");
  if (direction != 1 && direction != -1) throw InvalidParams("direction must be +-1");
  const double d = direction;
  std::map<std::string, std::vector<ScheduleSegment>> ch;
  const double T = period * cycles;
  for (int c = 0; c < cycles; ++c) {
    const double t0 = c * period;
    ch["M1"].push_back({t0, t0 + 0.5 * period, SegmentKind::Cos2, 1.0, -1.0});
    ch["M1"].push_back({t0 + 0.5 * period, t0 + period, SegmentKind::Cos2, -1.0, 1.0});
    ch["M2"].push_back({t0, t0 + 0.25 * period, SegmentKind::Cos2, 0.0, d});
    ch["M2"].push_back({t0 + 0.25 * period, t0 + 0.75 * period, SegmentKind::Cos2, d, -d});
    ch["M2"].push_back({t0 + 0.75 * period, t0 + period, SegmentKind::Cos2, -d, 0.0});
  }
  ch["I0"].push_back({0.0, T, SegmentKind::Constant, 1.0, 1.0});
  ch["H1"].push_back({0.0, T, SegmentKind::Constant, 0.0, 0.0});
  ch["H2"].push_back({0.0, T, SegmentKind::Constant, 0.0, 0.0});
  return Schedule(T, std::move(ch));
}

}  // namespace microtrap
