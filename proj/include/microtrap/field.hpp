#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "microtrap/errors.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// Field vector, Jacobian dB_i/dx_j and (optionally) the Hessian of |B| at a
// point. In current-free regions the Jacobian is symmetric and traceless.
struct FieldSample {
  Vec3 point;
  Vec3 B;           // [T]
  Mat3 J;           // [T/m]
  std::optional<Mat3> H_norm;  // Hessian of |B| [T/m^2]
};

namespace detail {

inline double point_segment_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

inline Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// s_a s_b + r_a.r_b, rewritten through the Lagrange identity when the dot
// product is negative (near the perpendicular bisector plane the direct sum
// cancels catastrophically):
//   s_a s_b + g = |r_a x r_b|^2 / (s_a s_b - g)
inline double stable_bisector_term(double ss, double g, double cross2) {
  return g >= 0.0 ? ss + g : cross2 / (ss - g);
}

}  // namespace detail

// Tangential field of an ideal straight wire, B = mu0 I / (2 pi R), azimuthal
// by the right-hand rule.
inline Vec3 field_infinite_wire(const InfiniteWire& wire, const Vec3& p) {
  const Vec3 rel = p - wire.anchor;
  const Vec3 rho = rel - rel.dot(wire.direction) * wire.direction;
  const double r2 = rho.squaredNorm();
  if (r2 < kSingularityRadius * kSingularityRadius)
    throw FieldSingularity("point on infinite wire" +
                           (wire.label.empty() ? "" : " '" + wire.label + "'"));
  return constants::mu0_over_2pi * wire.current * wire.direction.cross(rho) / r2;
}

inline Mat3 jacobian_infinite_wire(const InfiniteWire& wire, const Vec3& p) {
  const Vec3 rel = p - wire.anchor;
  const Vec3 rho = rel - rel.dot(wire.direction) * wire.direction;
  const double r2 = rho.squaredNorm();
  if (r2 < kSingularityRadius * kSingularityRadius)
    throw FieldSingularity("point on infinite wire");
  const Mat3 proj = Mat3::Identity() - wire.direction * wire.direction.transpose();
  const Vec3 dxr = wire.direction.cross(rho);
  return constants::mu0_over_2pi * wire.current *
         (detail::cross_matrix(wire.direction) * proj / r2 -
          2.0 * dxr * rho.transpose() / (r2 * r2));
}

// Closed-form Biot-Savart field of a straight filament from a to b:
//   B = (mu0 I / 4 pi) (r_a x r_b) (|r_a| + |r_b|)
//       / ( |r_a||r_b| (|r_a||r_b| + r_a.r_b) )
// The denominator vanishes only on the segment itself; a collinear point
// outside the segment gives r_a x r_b = 0 and hence zero field.
inline Vec3 field_segment(const Vec3& a, const Vec3& b, double current, const Vec3& p) {
  if ((b - a).norm() <= kMinPointSeparation)
    throw DegenerateSegment("segment endpoints coincide");
  if (detail::point_segment_distance(a, b, p) < kSingularityRadius)
    throw FieldSingularity("point on filament segment");
  const Vec3 ra = p - a, rb = p - b;
  const Vec3 c = ra.cross(rb);
  const double c2 = c.squaredNorm();
  if (c2 == 0.0) return Vec3::Zero();
  const double sa = ra.norm(), sb = rb.norm();
  const double den = sa * sb * detail::stable_bisector_term(sa * sb, ra.dot(rb), c2);
  return constants::mu0_over_4pi * current * c * (sa + sb) / den;
}

// Analytic derivative of field_segment with respect to the evaluation point.
inline Mat3 jacobian_segment(const Vec3& a, const Vec3& b, double current, const Vec3& p) {
  if ((b - a).norm() <= kMinPointSeparation)
    throw DegenerateSegment("segment endpoints coincide");
  if (detail::point_segment_distance(a, b, p) < kSingularityRadius)
    throw FieldSingularity("point on filament segment");
  const Vec3 ra = p - a, rb = p - b;
  const Vec3 c = ra.cross(rb);
  const double sa = ra.norm(), sb = rb.norm();
  const double g = ra.dot(rb);
  const double ss = sa * sb;
  const double bisector = detail::stable_bisector_term(ss, g, c.squaredNorm());
  const double den = ss * bisector;
  const Vec3 u = ra / sa, v = rb / sb;
  const double N = sa + sb;
  // dc/dp_j = (b - a) x e_j  (columns), i.e. the cross matrix of L = b - a
  const Mat3 dc = detail::cross_matrix(b - a);
  const Vec3 dN = u + v;
  const Vec3 dss = sb * u + sa * v;
  const Vec3 dden = dss * bisector + ss * (dss + ra + rb);
  // f = N / den
  const Vec3 df = (dN * den - N * dden) / (den * den);
  return constants::mu0_over_4pi * current *
         (c * df.transpose() + (N / den) * dc);
}

// Sum of all conductors (thin or ribbon-subdivided filaments), infinite wires
// and the uniform bias, with channel multipliers applied. Linear in every
// current and in the bias.
inline Vec3 field_total(const Layout& layout, const Vec3& p,
                        const ChannelValues& values = {}) {
  Vec3 B = layout.bias_at(values);
  for (const auto& f : layout.filaments()) {
    const double I = layout.conductor_current(f.conductor, values) * f.fraction;
    if (detail::point_segment_distance(f.a, f.b, p) < kSingularityRadius) {
      const auto& c = layout.conductors()[f.conductor];
      throw FieldSingularity("point on conductor " + std::to_string(f.conductor) +
                             (c.label.empty() ? "" : " ('" + c.label + "')"));
    }
    const Vec3 ra = p - f.a, rb = p - f.b;
    const Vec3 cr = ra.cross(rb);
    const double cr2 = cr.squaredNorm();
    if (cr2 == 0.0) continue;
    const double sa = ra.norm(), sb = rb.norm();
    const double den =
        sa * sb * detail::stable_bisector_term(sa * sb, ra.dot(rb), cr2);
    B += constants::mu0_over_4pi * I * cr * (sa + sb) / den;
  }
  for (std::size_t i = 0; i < layout.infinite_wires().size(); ++i) {
    InfiniteWire w = layout.infinite_wires()[i];
    w.current = layout.infinite_wire_current(i, values);
    B += field_infinite_wire(w, p);
  }
  return B;
}

inline Mat3 jacobian(const Layout& layout, const Vec3& p,
                     const ChannelValues& values = {}) {
  Mat3 J = Mat3::Zero();
  for (const auto& f : layout.filaments()) {
    const double I = layout.conductor_current(f.conductor, values) * f.fraction;
    J += jacobian_segment(f.a, f.b, I, p);
  }
  for (std::size_t i = 0; i < layout.infinite_wires().size(); ++i) {
    InfiniteWire w = layout.infinite_wires()[i];
    w.current = layout.infinite_wire_current(i, values);
    J += jacobian_infinite_wire(w, p);
  }
  return J;
}

inline double distance_to_nearest_filament(const Layout& layout, const Vec3& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& f : layout.filaments())
    d = std::min(d, detail::point_segment_distance(f.a, f.b, p));
  for (const auto& w : layout.infinite_wires()) {
    const Vec3 rel = p - w.anchor;
    d = std::min(d, (rel - rel.dot(w.direction) * w.direction).norm());
  }
  return d;
}

// Threshold below which the Hessian of |B| is considered undefined (|B| is
// not differentiable at its zeros).
inline constexpr double kZeroFieldThreshold = 1e-8;  // [T]

struct HessianOptions {
  std::optional<double> step;   // per-axis step [m]; default scales with geometry
  bool richardson = false;      // one level of Richardson extrapolation
};

// Second-order central differences of a scalar function of position,
// symmetrized. F: Vec3 -> double.
template <typename F>
Mat3 scalar_hessian_fd(F&& f, const Vec3& p, double h) {
  Mat3 H;
  const double f0 = f(p);
  for (int i = 0; i < 3; ++i) {
    Vec3 ei = Vec3::Zero();
    ei[i] = h;
    H(i, i) = (f(p + ei) - 2.0 * f0 + f(p - ei)) / (h * h);
    for (int j = i + 1; j < 3; ++j) {
      Vec3 ej = Vec3::Zero();
      ej[j] = h;
      const double v = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) /
                       (4.0 * h * h);
      H(i, j) = H(j, i) = v;
    }
  }
  return H;
}

template <typename FieldFn>
Mat3 norm_hessian_of(FieldFn&& field, const Vec3& p, double step,
                     bool richardson = false) {
  auto nb = [&](const Vec3& q) { return Vec3(field(q)).norm(); };
  if (Vec3(field(p)).norm() < kZeroFieldThreshold)
    throw ZeroFieldRegion("|B| below threshold; Hessian of |B| undefined near zeros");
  const Mat3 H = scalar_hessian_fd(nb, p, step);
  if (!richardson) return H;
  const Mat3 H2 = scalar_hessian_fd(nb, p, 0.5 * step);
  return (4.0 * H2 - H) / 3.0;
}

// Hessian of |B| for a layout. The default step follows the local geometric
// scale (distance to the nearest filament), floored at 10 nm.
inline Mat3 norm_hessian(const Layout& layout, const Vec3& p,
                         const ChannelValues& values = {},
                         const HessianOptions& opts = {}) {
  const double scale = distance_to_nearest_filament(layout, p);
  const double h = opts.step.value_or(std::max(1e-8, 1e-3 * scale));
  return norm_hessian_of([&](const Vec3& q) { return field_total(layout, q, values); },
                         p, h, opts.richardson);
}

inline FieldSample sample_field(const Layout& layout, const Vec3& p,
                                const ChannelValues& values = {},
                                bool with_hessian = false) {
  FieldSample s;
  s.point = p;
  s.B = field_total(layout, p, values);
  s.J = jacobian(layout, p, values);
  if (with_hessian) s.H_norm = norm_hessian(layout, p, values);
  return s;
}

// Central-difference Jacobian of an arbitrary field function, mainly used to
// cross-check the analytic forms.
template <typename FieldFn>
Mat3 jacobian_fd_of(FieldFn&& field, const Vec3& p, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e[j] = h;
    const Vec3 d = (Vec3(field(p + e)) - Vec3(field(p - e))) / (2.0 * h);
    J.col(j) = d;
  }
  return J;
}

}  // namespace microtrap
