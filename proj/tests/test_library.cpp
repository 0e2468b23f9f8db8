#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <microtrap/field.hpp>
#include <microtrap/grid.hpp>
#include <microtrap/layout_io.hpp>
#include <microtrap/trap_analysis.hpp>
#include <microtrap/trap_library.hpp>
#include <microtrap/units.hpp>

using namespace microtrap;
using Catch::Approx;

TEST_CASE("side guide builder") {
  SECTION("1 A at 1 mm height needs 2 G") {
    const auto sg = make_side_guide(1.0, std::nullopt, 1e-3);
    CHECK(tesla_to_gauss(sg.layout.bias().y()) == Approx(2.0).epsilon(1e-6));
  }
  SECTION("2 A against 160 G sits at 25 um") {
    const auto sg = make_side_guide(2.0, gauss_to_tesla(160.0), std::nullopt);
    CHECK(m_to_um(sg.z0) == Approx(25.0).epsilon(1e-12));
  }
  SECTION("height round trip through the built field") {
    const auto sg = make_side_guide(2.0, std::nullopt, 25e-6);
    const QuadParams q = quad_params(sg.layout);
    CHECK(q.z0_located == Approx(25e-6).epsilon(1e-3));
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(make_side_guide(1.0, 1e-3, 1e-3), InvalidParams);
    CHECK_THROWS_AS(make_side_guide(1.0, std::nullopt, std::nullopt), InvalidParams);
    CHECK_THROWS_AS(make_side_guide(0.0, std::nullopt, 1e-3), InvalidParams);
  }
}

TEST_CASE("crossing trap builder") {
  SECTION("attractive configuration: 5 G minimum at the intersection") {
    const auto ct = make_crossing_trap(2.0, 0.5, gauss_to_tesla(160.0),
                                       gauss_to_tesla(-45.0));
    CHECK(ct.kind == IntersectionKind::Trap);
    const Vec3 m = find_minimum(ct.layout, Vec3(0, 0, ct.z0));
    CHECK(tesla_to_gauss(field_total(ct.layout, m).norm()) == Approx(4.85).margin(0.01));
    CHECK(std::abs(m.x()) < 0.1e-6);
  }
  SECTION("no axial bias: repulsive, 40 G barrier") {
    const auto ct = make_crossing_trap(2.0, 0.5, gauss_to_tesla(160.0), 0.0);
    CHECK(ct.kind == IntersectionKind::Repulsive);
    CHECK(tesla_to_gauss(ct.barrier) == Approx(40.0).epsilon(1e-9));
  }
  SECTION("zero crossing current degenerates to the side guide") {
    const auto ct = make_crossing_trap(2.0, 0.0, gauss_to_tesla(160.0), 0.0);
    const auto prof = longitudinal_profile(ct.layout, -50e-6, 50e-6, 11);
    for (std::size_t i = 1; i < prof.x.size(); ++i)
      CHECK(prof.approx_Bmin[i] == Approx(prof.approx_Bmin[0]).margin(1e-9));
  }
  SECTION("|B| on the xz-plane is invariant under the bias mirror") {
    const auto plus = make_crossing_trap(2.0, 0.5, gauss_to_tesla(160.0),
                                         gauss_to_tesla(45.0));
    const auto minus = make_crossing_trap(2.0, 0.5, gauss_to_tesla(160.0),
                                          gauss_to_tesla(-45.0));
    GridSpec spec;
    spec.lo = Vec3(-80e-6, 0, 10e-6);
    spec.hi = Vec3(80e-6, 0, 60e-6);
    spec.counts = {33, 1, 21};
    const GridResult gp = grid_eval(plus.layout, spec);
    const GridResult gm = grid_eval(minus.layout, spec);
    for (std::size_t i = 0; i < gp.norm.size(); ++i)
      REQUIRE(gp.norm[i] == Approx(gm.norm[i]).epsilon(1e-6));
  }
}

TEST_CASE("H trap builder") {
  const double z0 = 25e-6;
  SECTION("d = 4 z0 with the axial bias gives two displaced minima") {
    const auto h = make_H_trap(2.0, 0.5, 0.5, 4 * z0, gauss_to_tesla(160.0),
                               gauss_to_tesla(-45.0));
    const Vec3 left = find_minimum(h.layout, Vec3(-50e-6, 0, z0));
    const Vec3 right = find_minimum(h.layout, Vec3(50e-6, 0, z0));
    CHECK(left.x() == Approx(-50e-6).margin(2e-6));
    CHECK(right.x() == Approx(50e-6).margin(2e-6));
    // displaced off-axis by the opposite wire, mirror images of each other
    CHECK(std::abs(left.y()) > 0.5e-6);
    CHECK(left.y() == Approx(-right.y()).margin(1e-8));
  }
  SECTION("without axial bias a single central trap forms") {
    const auto h = make_H_trap(2.0, 0.5, 0.5, 4 * z0, gauss_to_tesla(160.0), 0.0);
    const Vec3 m = find_minimum(h.layout, Vec3(5e-6, 0, z0));
    CHECK(std::abs(m.x()) < 0.1e-6);
    CHECK(tesla_to_gauss(field_total(h.layout, m).norm()) > 1.0);
  }
  SECTION("swapping the crossing currents mirrors |B| about x = 0") {
    const auto a = make_H_trap(2.0, 0.6, 0.3, 4 * z0, gauss_to_tesla(160.0),
                               gauss_to_tesla(-45.0));
    const auto b = make_H_trap(2.0, 0.3, 0.6, 4 * z0, gauss_to_tesla(160.0),
                               gauss_to_tesla(-45.0));
    GridSpec spec;
    spec.lo = Vec3(-120e-6, 0, 10e-6);
    spec.hi = Vec3(120e-6, 0, 60e-6);
    spec.counts = {49, 1, 21};  // odd x-count, symmetric range
    const GridResult ga = grid_eval(a.layout, spec);
    const GridResult gb = grid_eval(b.layout, spec);
    const int nx = spec.counts[0];
    for (int iz = 0; iz < spec.counts[2]; ++iz)
      for (int ix = 0; ix < nx; ++ix) {
        const double va = ga.norm[ix + static_cast<std::size_t>(nx) * iz];
        const double vb = gb.norm[(nx - 1 - ix) + static_cast<std::size_t>(nx) * iz];
        REQUIRE(va == Approx(vb).epsilon(1e-6));
      }
  }
  SECTION("needs a positive spacing") {
    CHECK_THROWS_AS(make_H_trap(2.0, 0.5, 0.5, 0.0, gauss_to_tesla(160.0), 0.0),
                    InvalidParams);
  }
}

TEST_CASE("optimal crossing spacing") {
  SECTION("a* = z0 across guide scales") {
    for (auto [I0, B0y_G] : {std::pair{2.0, 160.0}, {1.0, 24.0}, {3.0, 20.0}}) {
      const double z0 = constants::mu0_over_2pi * I0 / gauss_to_tesla(B0y_G);
      const double a = optimize_spacing(I0, 0.5, gauss_to_tesla(B0y_G));
      CHECK(a == Approx(z0).epsilon(0.01));
    }
  }
  SECTION("returns a strict local maximum of the curvature") {
    const double z0 = 25e-6;
    const double a = optimize_spacing(2.0, 0.5, gauss_to_tesla(160.0));
    const double at = spacing_curvature(a, 0.5, z0);
    CHECK(at > spacing_curvature(0.8 * a, 0.5, z0));
    CHECK(at > spacing_curvature(1.2 * a, 0.5, z0));
  }
  SECTION("optimum scales with z0") {
    const double a1 = optimize_spacing(2.0, 0.5, gauss_to_tesla(160.0));
    const double a2 = optimize_spacing(2.0, 0.5, gauss_to_tesla(80.0));
    CHECK(a2 == Approx(2.0 * a1).epsilon(1e-6));
  }
}

TEST_CASE("four-wire trap builder") {
  const double B0y = gauss_to_tesla(160.0);
  SECTION("transverse curvature against the b^2/Bmin oracle") {
    // I2 tuned so the center field matches b^2/kappa ~ 3.76 G
    const auto fw = make_four_wire(2.0, 0.5, 0.452, 0.5, B0y);
    const Vec3 m = find_minimum(fw.layout, Vec3(0, 0, 24e-6));
    const double Bmin = field_total(fw.layout, m).norm();
    const TrapReport rep = characterize(fw.layout, m, species_rb87());
    const double kappa_oracle = fw.b * fw.b / Bmin;
    CHECK(rep.kappa[0] == Approx(kappa_oracle).epsilon(0.10));
    // within 15% of the published transverse curvature 1.09e9 G/cm^2
    CHECK(rep.kappa[0] == Approx(1.09e9).epsilon(0.15));
    CHECK(rep.kappa[1] == Approx(1.09e9).epsilon(0.15));
  }
  SECTION("I2 = 0 reduces to the optimally spaced H trap") {
    const auto fw = make_four_wire(2.0, 0.5, 0.0, 0.5, B0y);
    const auto h = make_H_trap(2.0, 0.5, 0.5, 2 * fw.z0, B0y, 0.0);
    const Vec3 p(10e-6, 3e-6, 30e-6);
    // same field up to the zero-current center wire
    CHECK((field_total(fw.layout, p) - field_total(h.layout, p)).norm() < 1e-15);
  }
  SECTION("the zero-minimum limit is rejected") {
    CHECK_THROWS_AS(make_four_wire(2.0, 0.5, 0.5, 0.5, B0y), FieldZeroRisk);
    CHECK_THROWS_AS(make_four_wire(2.0, 0.5, 0.6, 0.5, B0y), FieldZeroRisk);
  }
}

TEST_CASE("rotatable cross") {
  SECTION("endpoint states carry the published 90-degree parameters") {
    const RotationState s90 = rotation_state_90();
    CHECK(s90.I1 == Approx(0.2));
    CHECK(s90.I2 == Approx(-1.2));
    CHECK(tesla_to_gauss(s90.B0x) == Approx(10.0));
    CHECK(tesla_to_gauss(s90.B0y) == Approx(4.0));
    const RotationState s0 = rotation_state_0();
    CHECK(s0.I1 > s0.I2);                       // left column: I1 > I2
    CHECK(std::abs(s0.B0y) > std::abs(s0.B0x))  // and |B0y| > |B0x|
    ;
  }
  SECTION("schedule interpolates continuously") {
    const auto states = make_rotation_schedule(21);
    REQUIRE(states.size() == 21);
    for (std::size_t i = 1; i < states.size(); ++i) {
      CHECK(std::abs(states[i].I1 - states[i - 1].I1) < 0.15);
      CHECK(std::abs(states[i].I2 - states[i - 1].I2) < 0.15);
    }
    CHECK(states.front().I1 == Approx(rotation_state_0().I1));
    CHECK(states.back().I2 == Approx(rotation_state_90().I2));
    CHECK_THROWS_AS(make_rotation_schedule(1), InvalidParams);
  }
  SECTION("exchanged parameters mirror the potential in x <-> y") {
    const Layout l0 = make_rotatable_cross(rotation_state_0());
    const Layout l90 = make_rotatable_cross(rotation_state_90());
    for (double x : {-400e-6, 150e-6, 600e-6})
      for (double y : {-250e-6, 90e-6})
        for (double z : {120e-6, 280e-6}) {
          const double v0 = field_total(l0, Vec3(x, y, z)).norm();
          const double v90 = field_total(l90, Vec3(y, x, z)).norm();
          REQUIRE(v0 == Approx(v90).epsilon(1e-12));
        }
  }
  SECTION("full-geometry characterization lands near the published values") {
    const Layout l90 = make_rotatable_cross(rotation_state_90());
    const Vec3 m = find_minimum(l90, Vec3(0, 0, 230e-6));
    const TrapReport rep = characterize(l90, m, species_rb87());
    CHECK(rep.nu[0] == Approx(378.0).epsilon(0.25));
    CHECK(rep.nu[1] == Approx(365.0).epsilon(0.25));
    CHECK(rep.nu[2] == Approx(97.0).epsilon(0.25));
  }
  SECTION("sweep: nonzero minimum away from the degenerate midpoint") {
    // At theta = 45 deg the parameters hit |I1| = |I2|, |B0x| = |B0y| and the
    // pure-cross quadrupole ring degeneracy survives bent leads: the ring
    // breaks into isolated zeros but does not lift. Away from that instant
    // the trap is a proper nonzero-minimum trap.
    for (double theta : {0.0, 15.0, 30.0, 60.0, 75.0, 90.0}) {
      const Layout l = make_rotatable_cross(rotation_state(theta));
      Vec3 best = Vec3(0, 0, 200e-6);
      double best_B = std::numeric_limits<double>::infinity();
      for (double x = -300e-6; x <= 300e-6; x += 30e-6)
        for (double y = -300e-6; y <= 300e-6; y += 30e-6)
          for (double z = 80e-6; z <= 320e-6; z += 30e-6) {
            const double v = field_total(l, Vec3(x, y, z)).norm();
            if (v < best_B) {
              best_B = v;
              best = Vec3(x, y, z);
            }
          }
      const Vec3 m = find_minimum(l, best);
      REQUIRE(tesla_to_gauss(field_total(l, m).norm()) > 0.5);
    }
    // the degenerate instant itself: the minimum collapses toward zero
    const Layout mid = make_rotatable_cross(rotation_state(45.0));
    double best_B = std::numeric_limits<double>::infinity();
    Vec3 best = Vec3::Zero();
    for (double x = -150e-6; x <= 150e-6; x += 10e-6)
      for (double y = -150e-6; y <= 150e-6; y += 10e-6)
        for (double z = 100e-6; z <= 280e-6; z += 10e-6) {
          const double v = field_total(mid, Vec3(x, y, z)).norm();
          if (v < best_B) {
            best_B = v;
            best = Vec3(x, y, z);
          }
        }
    const Vec3 m = find_minimum(mid, best);
    CHECK(tesla_to_gauss(field_total(mid, m).norm()) < 0.05);
  }
}

TEST_CASE("elongated Z guide") {
  const auto z = make_elongated_Z(1.0, gauss_to_tesla(24.0));
  SECTION("transverse gradient within 10% of 3000 G/cm") {
    const QuadParams q = quad_params(z.layout);
    CHECK(tesla_per_m_to_gauss_per_cm(q.b) == Approx(3000.0).epsilon(0.10));
  }
  SECTION("small axial field in the center") {
    const Vec3 m = find_minimum(z.layout, Vec3(0, 0, z.z0));
    const double axial = tesla_to_gauss(field_total(z.layout, m).norm());
    // order 0.01 G, geometry-dependent within a factor 3
    CHECK(axial > 0.01 / 3.0);
    CHECK(axial < 0.01 * 3.0);
  }
  SECTION("guide locality: lengthening the center barely moves the gradient") {
    const auto longer = make_elongated_Z(1.0, gauss_to_tesla(24.0), 9e-3);
    const Vec3 p(0, 0, z.z0 + 10e-6);
    const Mat3 J1 = jacobian(z.layout, p);
    const Mat3 J2 = jacobian(longer.layout, p);
    CHECK((J1 - J2).norm() / J1.norm() < 0.01);
  }
  SECTION("parameter validation") {
    CHECK_THROWS_AS(make_elongated_Z(0.0, 1e-3), InvalidParams);
    CHECK_THROWS_AS(make_elongated_Z(1.0, 0.0), InvalidParams);
    CHECK_THROWS_AS(make_elongated_Z(1.0, 1e-3, 7e-3, 3e-3), InvalidParams);
  }
}

TEST_CASE("conductor limits") {
  SECTION("thin-film gold strip at 1 A") {
    const ConductorLimits lim = conductor_limits(10e-6, 7e-6, 2.2e-8, 1.0);
    CHECK(lim.resistance_per_length * 1e-2 == Approx(3.142857).epsilon(1e-6));  // Ohm/cm
    CHECK(lim.power_per_length * 1e-2 == Approx(3.142857).epsilon(1e-6));       // W/cm
    CHECK(lim.ok);
  }
  SECTION("3 A current density vs the stated maximum") {
    const ConductorLimits lim = conductor_limits(10e-6, 7e-6, 2.2e-8, 3.0);
    CHECK(lim.current_density * 1e-4 == Approx(4.2857e6).epsilon(1e-3));  // A/cm^2
    CHECK(lim.j_max * 1e-4 == Approx(4.6e6).epsilon(1e-12));
    CHECK(lim.ok);  // 4.29e6 < 4.6e6
    const ConductorLimits over = conductor_limits(10e-6, 7e-6, 2.2e-8, 3.3);
    CHECK_FALSE(over.ok);
  }
  SECTION("zero current: no power, no flag") {
    const ConductorLimits lim = conductor_limits(10e-6, 7e-6, 2.2e-8, 0.0);
    CHECK(lim.power_per_length == 0.0);
    CHECK(lim.current_density == 0.0);
    CHECK(lim.ok);
  }
  SECTION("json report") {
    const std::string json = limits_to_json(conductor_limits(10e-6, 7e-6, 2.2e-8, 3.0));
    CHECK(json.find("\"R_per_cm\"") != std::string::npos);
    CHECK(json.find("\"ok\"") != std::string::npos);
  }
  SECTION("validation") {
    CHECK_THROWS_AS(conductor_limits(0.0, 7e-6, 2.2e-8, 1.0), InvalidParams);
  }
}

TEST_CASE("builders round-trip through the file format") {
  const Layout layouts[] = {
      make_side_guide(2.0, gauss_to_tesla(160.0), std::nullopt).layout,
      make_crossing_trap(2.0, 0.5, gauss_to_tesla(160.0), gauss_to_tesla(-45.0)).layout,
      make_H_trap(2.0, 0.5, 0.5, 100e-6, gauss_to_tesla(160.0), gauss_to_tesla(-45.0)).layout,
      make_four_wire(2.0, 0.5, 0.45, 0.5, gauss_to_tesla(160.0)).layout,
      make_rotatable_cross(rotation_state_90()),
      make_elongated_Z(1.0, gauss_to_tesla(24.0)).layout,
      make_conveyor(),
  };
  for (const Layout& original : layouts) {
    const Layout back = parse_layout(serialize_layout(original));
    REQUIRE(back.conductors().size() == original.conductors().size());
    REQUIRE(back.channels().size() == original.channels().size());
    // the um <-> m double rounding allows 1 ulp per coordinate
    const Vec3 p(17e-6, -12e-6, 47e-6);
    const Vec3 Ba = field_total(original, p), Bb = field_total(back, p);
    REQUIRE((Ba - Bb).norm() <= 1e-12 * Ba.norm());
  }
}

TEST_CASE("conveyor layout") {
  const Layout conv = make_conveyor();
  SECTION("channels cover the drive and holding wires") {
    for (const char* name : {"I0", "M1", "M2", "H1", "H2"})
      CHECK(conv.channels().contains(name));
  }
  SECTION("with modulation off, the guide is a plain elongated trap") {
    const ChannelValues off{{"M1", 0.0}, {"M2", 0.0}, {"H1", 0.0}, {"H2", 0.0}};
    const auto prof = longitudinal_profile(conv, -300e-6, 300e-6, 31, off);
    for (std::size_t i = 1; i < prof.x.size(); ++i)
      CHECK(std::abs(prof.approx_Bmin[i] - prof.approx_Bmin[0]) <
            0.02 * prof.approx_Bmin[0]);
  }
  SECTION("with M1 on, wells appear at the comb period") {
    const ChannelValues on{{"M1", 1.0}, {"M2", 0.0}, {"H1", 0.0}, {"H2", 0.0}};
    const auto prof = longitudinal_profile(conv, -210e-6, 210e-6, 211, on);
    // count interior local minima of the exact branch
    int minima = 0;
    for (std::size_t i = 1; i + 1 < prof.x.size(); ++i)
      if (prof.exact_Bmin[i] < prof.exact_Bmin[i - 1] &&
          prof.exact_Bmin[i] < prof.exact_Bmin[i + 1])
        ++minima;
    // comb period 2 s = 200 um over a 420 um window: 2-3 wells
    CHECK(minima >= 2);
    CHECK(minima <= 3);
  }
}
