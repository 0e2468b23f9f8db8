#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include <microtrap/layout.hpp>
#include <microtrap/layout_io.hpp>
#include <microtrap/schedule.hpp>
#include <microtrap/species.hpp>
#include <microtrap/units.hpp>

using namespace microtrap;
using Catch::Approx;

namespace {

bool within_ulps(double a, double b, int ulps) {
  double lo = b, hi = b;
  for (int i = 0; i < ulps; ++i) {
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  return a >= lo && a <= hi;
}

const char* kMinimalLayout = R"({
  "format_version": "1.0",
  "units": {"length": "um", "current": "A", "field": "G"},
  "conductors": [
    {"label": "guide", "path": [[-10000, 0, 0], [10000, 0, 0]], "current": 2.0}
  ],
  "bias": {"y": 160.0}
})";

}  // namespace

TEST_CASE("unit conversions") {
  SECTION("exact coefficients") {
    CHECK(gauss_to_tesla(1.0) == 1e-4);
    CHECK(gauss_per_cm_to_tesla_per_m(1.0) == 1e-2);
    CHECK(gauss_per_cm2_to_tesla_per_m2(1.0) == 1.0);
  }
  SECTION("round trips are lossless to 1 ulp") {
    for (double v : {1.0, 160.0, 3.1415, 2.048e-1, 7e-6, 425.0, 1e9}) {
      CHECK(within_ulps(tesla_to_gauss(gauss_to_tesla(v)), v, 1));
      CHECK(within_ulps(m_to_um(um_to_m(v)), v, 1));
      CHECK(within_ulps(s_to_ms(ms_to_s(v)), v, 1));
    }
  }
  SECTION("mu0/2pi reproduces the 2 G mm/A coefficient") {
    // 1 A at 1 mm -> 2 G
    CHECK(constants::mu0_over_2pi * 1.0 / 1e-3 == Approx(gauss_to_tesla(2.0)).epsilon(1e-12));
    CHECK(constants::mu0 / (2.0 * constants::pi) == Approx(2e-7).epsilon(1e-15));
  }
}

TEST_CASE("rb87 species") {
  const AtomSpecies rb = species_rb87();
  CHECK(rb.mass == Approx(1.4432e-25).epsilon(1e-4));
  CHECK(rb.gF_mF == 1.0);
  CHECK(rb.magnetic_moment() == Approx(constants::mu_bohr).epsilon(1e-12));

  // recoil frequency h/(2 m lambda^2), evaluated independently
  const double nur = constants::planck_h /
                     (2.0 * rb.mass * 780.24e-9 * 780.24e-9);
  CHECK(rb.recoil_frequency() == Approx(nur).epsilon(1e-12));
  CHECK(rb.recoil_frequency() == Approx(3770.0).epsilon(0.01));  // 3.77 kHz +- 1%

  // CODATA 87Rb mass over proton mass (86.909180531 u / 1.00727646688 u)
  CHECK(rb.mass / constants::proton_mass == Approx(86.281).epsilon(5e-3));
}

TEST_CASE("layout validation") {
  SECTION("path needs two distinct points") {
    CHECK_THROWS_AS(Layout({Conductor{{Vec3(0, 0, 0)}, 1.0}}, {}, Vec3::Zero()),
                    ValidationError);
    CHECK_THROWS_AS(
        Layout({Conductor{{Vec3(0, 0, 0), Vec3(0, 0, 1e-13)}, 1.0}}, {}, Vec3::Zero()),
        ValidationError);
  }
  SECTION("ribbon requires a cross-section") {
    Conductor c{{Vec3(-1e-3, 0, 0), Vec3(1e-3, 0, 0)}, 1.0};
    c.model = ConductorModel::Ribbon;
    CHECK_THROWS_AS(Layout({c}, {}, Vec3::Zero()), ValidationError);
    c.cross_section = CrossSection{10e-6, 7e-6};
    c.n_w = 0;
    CHECK_THROWS_AS(Layout({c}, {}, Vec3::Zero()), ValidationError);
    c.n_w = 3;
    c.n_h = 2;
    const Layout ok({c}, {}, Vec3::Zero());
    CHECK(ok.filaments().size() == 6);
  }
  SECTION("infinite wire direction must be unit") {
    InfiniteWire w;
    w.direction = Vec3(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(Layout({}, {w}, Vec3::Zero()), ValidationError);
  }
  SECTION("channel binding must resolve") {
    Conductor c{{Vec3(-1e-3, 0, 0), Vec3(1e-3, 0, 0)}, 1.0};
    c.label = "m1";
    std::map<std::string, ChannelBinding> ch{{"M1", {{"nonexistent"}, {}}}};
    CHECK_THROWS_AS(Layout({c}, {}, Vec3::Zero(), ch), ValidationError);
  }
  SECTION("channel multipliers scale bound currents") {
    Conductor c{{Vec3(-1e-3, 0, 0), Vec3(1e-3, 0, 0)}, 2.0};
    c.label = "m1";
    std::map<std::string, ChannelBinding> ch{{"M1", {{"m1"}, {1}}}};
    const Layout layout({c}, {}, Vec3(0, 1e-4, 0), ch);
    CHECK(layout.conductor_current(0, {}) == 2.0);  // all-ones reproduces statics
    CHECK(layout.conductor_current(0, {{"M1", 0.25}}) == Approx(0.5));
    CHECK(layout.bias_at({{"M1", 0.25}}).y() == Approx(0.25e-4));
    CHECK_THROWS_AS(layout.check_channel_values({{"bogus", 1.0}}), ValidationError);
  }
}

TEST_CASE("layout file parsing") {
  SECTION("minimal file") {
    const Layout layout = parse_layout(kMinimalLayout);
    REQUIRE(layout.conductors().size() == 1);
    CHECK(layout.conductors()[0].current == 2.0);
    CHECK(layout.conductors()[0].path[0].x() == Approx(-10e-3));
    CHECK(layout.bias().norm() == Approx(0.016));
  }
  SECTION("bias-only layout is valid") {
    const Layout layout = parse_layout(R"({
      "format_version": "1.0", "units": {"field": "G"}, "bias": {"z": 1.0}
    })");
    CHECK(layout.conductors().empty());
    CHECK(layout.bias().z() == Approx(1e-4));
  }
  SECTION("dangling channel binding is a validation error") {
    CHECK_THROWS_AS(parse_layout(R"({
      "format_version": "1.0", "units": {},
      "conductors": [{"path": [[0,0,0],[1,0,0]], "current": 1.0}],
      "channels": {"M1": {"conductors": ["m1"]}}
    })"),
                    ValidationError);
  }
  SECTION("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_layout(R"({
      "format_version": "1.0", "units": {}, "extra": 1
    })"),
                    SyntaxError);
    CHECK_THROWS_AS(parse_layout(R"({
      "format_version": "1.0", "units": {},
      "conductors": [{"path": [[0,0,0],[1,0,0]], "current": 1.0, "typo": true}]
    })"),
                    SyntaxError);
  }
  SECTION("unknown units are rejected") {
    CHECK_THROWS_AS(parse_layout(R"({
      "format_version": "1.0", "units": {"length": "furlong"}
    })"),
                    UnitError);
    CHECK_THROWS_AS(parse_layout(R"({"format_version": "1.0"})"), UnitError);
  }
  SECTION("unknown major version is rejected") {
    CHECK_THROWS_AS(parse_layout(R"({"format_version": "2.0", "units": {}})"),
                    SyntaxError);
    CHECK_NOTHROW(parse_layout(R"({"format_version": "1.7", "units": {}})"));
  }
  SECTION("malformed document") {
    CHECK_THROWS_AS(parse_layout("{ not json"), SyntaxError);
  }
}

TEST_CASE("layout serialize/parse round trip") {
  Conductor ribbon{{Vec3(-10e-3, 0, 0), Vec3(10e-3, 0, 0)}, 3.0,
                   CrossSection{10e-6, 7e-6}, ConductorModel::Ribbon, 15, 9, "strip"};
  InfiniteWire wire{Vec3(0, 1e-3, 0), Vec3::UnitY(), -0.25, "w"};
  std::map<std::string, ChannelBinding> ch{{"M1", {{"strip"}, {0, 2}}}};
  const Layout original({ribbon}, {wire}, Vec3(1e-4, -4.5e-3, 2.2e-7), ch, true);

  const Layout once = parse_layout(serialize_layout(original));
  const Layout twice = parse_layout(serialize_layout(once));

  REQUIRE(once.conductors().size() == 1);
  REQUIRE(once.infinite_wires().size() == 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(within_ulps(once.bias()[i], original.bias()[i], 1));
    CHECK(twice.bias()[i] == once.bias()[i]);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(twice.conductors()[0].path[k][i] == once.conductors()[0].path[k][i]);
  }
  CHECK(once.conductors()[0].current == original.conductors()[0].current);
  CHECK(once.conductors()[0].n_w == 15);
  CHECK(once.include_gravity());
  CHECK(once.channels().at("M1").bias_components == std::vector<int>{0, 2});
}

TEST_CASE("schedules") {
  std::map<std::string, std::vector<ScheduleSegment>> ch;
  ch["M1"] = {{0.0, 0.010, SegmentKind::Constant, 1.0, 1.0},
              {0.010, 0.030, SegmentKind::Cos2, 1.0, -1.0},
              {0.030, 0.050, SegmentKind::Ramp, -1.0, 0.0},
              {0.050, 0.100, SegmentKind::Step, 0.0, 0.7}};
  const Schedule s(0.100, ch);

  SECTION("evaluation") {
    CHECK(s.value("M1", 0.0) == 1.0);
    CHECK(s.value("M1", 0.020) == Approx(0.0).margin(1e-12));  // cos2 midpoint
    CHECK(s.value("M1", 0.040) == Approx(-0.5));
    CHECK(s.value("M1", 0.050) == 0.7);  // right-continuous at the step
    CHECK(s.value("M1", 0.100) == 0.7);
    CHECK(s.values_at(0.0).at("M1") == 1.0);
  }
  SECTION("outside the interval") {
    CHECK_THROWS_AS(s.value("M1", -1e-9), ScheduleRangeError);
    CHECK_THROWS_AS(s.value("M1", 0.100 + 1e-9), ScheduleRangeError);
  }
  SECTION("undeclared discontinuities are rejected") {
    std::map<std::string, std::vector<ScheduleSegment>> bad;
    bad["M1"] = {{0.0, 0.5, SegmentKind::Constant, 1.0, 1.0},
                 {0.5, 1.0, SegmentKind::Constant, 0.2, 0.2}};
    CHECK_THROWS_AS(Schedule(1.0, bad), ValidationError);
  }
  SECTION("segments must tile the interval") {
    std::map<std::string, std::vector<ScheduleSegment>> bad;
    bad["M1"] = {{0.0, 0.4, SegmentKind::Constant, 1.0, 1.0},
                 {0.5, 1.0, SegmentKind::Constant, 1.0, 1.0}};
    CHECK_THROWS_AS(Schedule(1.0, bad), ValidationError);
  }
  SECTION("io round trip") {
    const Schedule back = parse_schedule(serialize_schedule(s));
    CHECK(back.duration() == Approx(s.duration()));
    for (double t : {0.0, 0.015, 0.033, 0.05, 0.09})
      CHECK(back.value("M1", t) == Approx(s.value("M1", t)).margin(1e-15));
  }
  SECTION("file errors") {
    CHECK_THROWS_AS(parse_schedule(R"({"format_version": "1.0", "units": {}})"),
                    SyntaxError);  // missing duration
    CHECK_THROWS_AS(parse_schedule(R"({
      "format_version": "1.0", "units": {"time": "ms"}, "duration": 10,
      "channels": {"M1": [{"t0": 0, "t1": 10, "kind": "warp", "from": 1, "to": 1}]}
    })"),
                    SyntaxError);
  }
}
