// Command-line front end: build layouts, evaluate field grids and profiles,
// characterize traps, check conductor limits, run conveyor schedules and the
// linear collider. Data files (CSV/JSON) are deterministic; timestamps only
// ever appear in the metadata sidecars.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <microtrap/microtrap.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace microtrap;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr std::uint64_t kDefaultSeed = 12345;

// exit codes: 1 parse, 2 validation, 3 runtime
struct CliFailure : std::runtime_error {
  CliFailure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
  int code;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure(1, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliFailure(3, "cannot write '" + path.string() + "'");
  out << content;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// metadata sidecar: the only place a timestamp may appear
void write_sidecar(const fs::path& path, const std::string& command,
                   std::uint64_t input_hash,
                   std::optional<std::uint64_t> seed = {}) {
  json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["input_hash"] = input_hash;
  if (seed) j["seed"] = *seed;
  std::time_t now = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
  j["written_at"] = buf;
  write_file(path, j.dump(2));
}

Vec3 parse_vec_um(const std::string& s, const char* what) {
  Vec3 v;
  char c1, c2;
  std::istringstream in(s);
  if (!(in >> v.x() >> c1 >> v.y() >> c2 >> v.z()) || c1 != ',' || c2 != ',')
    throw CliFailure(1, std::string(what) + ": expected 'x,y,z'");
  return v * 1e-6;
}

std::array<int, 3> parse_counts(const std::string& s) {
  std::array<int, 3> n;
  char c1, c2;
  std::istringstream in(s);
  if (!(in >> n[0] >> c1 >> n[1] >> c2 >> n[2]) || c1 != ',' || c2 != ',')
    throw CliFailure(1, "--n: expected 'nx,ny,nz'");
  return n;
}

ChannelValues parse_multipliers(const std::string& s) {
  ChannelValues values;
  if (s.empty()) return values;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw CliFailure(1, "--multipliers: expected 'NAME=VALUE,...'");
    values[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
  }
  return values;
}

int env_threads() {
  const char* v = std::getenv("MICROTRAP_THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

// ---------------------------------------------------------------------------

struct FieldArgs {
  std::string layout_path, min_s, max_s, n_s = "101,1,101", multipliers, out_dir = ".";
  bool components = false;
};

void cmd_field(const FieldArgs& a) {
  const std::string text = read_file(a.layout_path);
  const Layout layout = parse_layout(text);
  const ChannelValues values = parse_multipliers(a.multipliers);
  layout.check_channel_values(values);

  GridSpec spec;
  spec.lo = parse_vec_um(a.min_s, "--min");
  spec.hi = parse_vec_um(a.max_s, "--max");
  spec.counts = parse_counts(a.n_s);
  const GridResult grid = grid_eval(layout, spec, values, {a.components, env_threads()});

  const fs::path dir(a.out_dir);
  write_file(dir / "grid.csv", grid_to_csv(grid));
  write_file(dir / "grid.json", grid_to_json(grid));
  write_sidecar(dir / "field_meta.json", "field", fnv1a(text));
  std::cout << "singular samples: " << grid.singular_count << "\n";
}

struct ProfileArgs {
  std::string layout_path, range_s, multipliers, out_dir = ".";
  int n = 201;
};

void cmd_profile(const ProfileArgs& a) {
  const std::string text = read_file(a.layout_path);
  const Layout layout = parse_layout(text);
  const ChannelValues values = parse_multipliers(a.multipliers);
  layout.check_channel_values(values);

  double x0, x1;
  char c;
  std::istringstream in(a.range_s);
  if (!(in >> x0 >> c >> x1) || c != ':')
    throw CliFailure(1, "--range: expected 'x0:x1' in um");
  const auto prof = longitudinal_profile(layout, x0 * 1e-6, x1 * 1e-6, a.n, values);

  const fs::path dir(a.out_dir);
  write_file(dir / "profile.csv", profile_to_csv(prof));
  json j;
  j["z0_um"] = m_to_um(prof.z0);
  j["b_G_per_cm"] = tesla_per_m_to_gauss_per_cm(prof.b);
  write_file(dir / "profile.json", j.dump(2));
  write_sidecar(dir / "profile_meta.json", "profile", fnv1a(text));
  std::cout << "z0 = " << m_to_um(prof.z0) << " um, b = "
            << tesla_per_m_to_gauss_per_cm(prof.b) << " G/cm\n";
}

struct TrapArgs {
  std::string layout_path, seed_s, multipliers, depth_box_s, curvature_s, out_path;
  std::string species = "rb87";
};

void cmd_trap(const TrapArgs& a) {
  AtomSpecies species;
  if (a.species == "rb87") species = species_rb87();
  else throw CliFailure(2, "unknown species '" + a.species + "'");

  TrapReport rep;
  if (!a.curvature_s.empty()) {
    // curvatures given directly (G/cm^2): only the conversion chain runs
    const Vec3 k = parse_vec_um(a.curvature_s, "--curvature-override") * 1e6;
    rep = report_from_curvatures({gauss_per_cm2_to_tesla_per_m2(k.x()),
                                  gauss_per_cm2_to_tesla_per_m2(k.y()),
                                  gauss_per_cm2_to_tesla_per_m2(k.z())},
                                 species);
  } else {
    if (a.layout_path.empty() || a.seed_s.empty())
      throw CliFailure(1, "trap needs --layout and --seed-point (or --curvature-override)");
    const std::string text = read_file(a.layout_path);
    const Layout layout = parse_layout(text);
    const ChannelValues values = parse_multipliers(a.multipliers);
    layout.check_channel_values(values);
    const Vec3 seed = parse_vec_um(a.seed_s, "--seed-point");
    const Vec3 r_min = find_minimum(layout, seed, values);
    CharacterizeOptions opts;
    if (!a.depth_box_s.empty())
      opts.depth_box_half = parse_vec_um(a.depth_box_s, "--depth-box");
    rep = characterize(layout, r_min, species, values, opts);
  }
  const std::string out = report_to_json(rep);
  std::cout << out << "\n";
  if (!a.out_path.empty()) write_file(a.out_path, out);
}

struct CollideArgs {
  std::string layout_path, schedule_path, clouds_s, out_dir = ".";
  double release_ms = 0.0, dt_ms = 0.01, t_end_ms = 100.0;
  double range_lo_um = -1900.0, range_hi_um = 1900.0;
  double temperature_uK = 0.0;
  int particles = 0;
  std::uint64_t seed = kDefaultSeed;
};

void cmd_collide(const CollideArgs& a) {
  const std::string ltext = read_file(a.layout_path);
  const std::string stext = read_file(a.schedule_path);
  const Layout layout = parse_layout(ltext);
  const Schedule schedule = parse_schedule(stext);
  const AtomSpecies rb = species_rb87();

  double xl, xr;
  char c;
  std::istringstream in(a.clouds_s);
  if (!(in >> xl >> c >> xr) || c != ',')
    throw CliFailure(1, "--clouds: expected 'x_left,x_right' in um");

  ColliderOptions opts;
  opts.dt = ms_to_s(a.dt_ms);
  opts.t_end = ms_to_s(a.t_end_ms);
  opts.x_begin = a.range_lo_um * 1e-6;
  opts.x_end = a.range_hi_um * 1e-6;

  CloudState left{"left", xl * 1e-6, 0.0, {}};
  CloudState right{"right", xr * 1e-6, 0.0, {}};
  const double release = ms_to_s(a.release_ms);
  if (a.particles > 0) {
    const double t_pre = std::max(0.0, release - 1e-9);
    const PotentialCurve1D pre = potential_1d(layout, schedule.values_at(t_pre),
                                              opts.x_begin, opts.x_end,
                                              opts.n_grid, rb);
    left = sample_thermal_cloud(pre, xl * 1e-6, a.temperature_uK * 1e-6,
                                a.particles, a.seed, rb, "left");
    right = sample_thermal_cloud(pre, xr * 1e-6, a.temperature_uK * 1e-6,
                                 a.particles, a.seed + 1, rb, "right");
  }

  const TrajectoryRecord rec =
      collider_run(layout, schedule, release, left, right, rb, opts);

  const fs::path dir(a.out_dir);
  write_file(dir / "trajectory.csv", trajectory_to_csv(rec));
  write_file(dir / "summary.json", trajectory_summary_json(rec, a.seed));
  write_sidecar(dir / "collide_meta.json", "collide", fnv1a(ltext + stext), a.seed);
  std::cout << "encounter at t = " << s_to_ms(rec.encounter_time) << " ms, x = "
            << m_to_um(rec.encounter_x) << " um\n";
}

struct ScheduleArgs {
  std::string layout_path, schedule_path, out_dir = ".";
  double duration_ms = 0.0, dt_ms = 0.5;
  double range_lo_um = -320.0, range_hi_um = 320.0;
};

void cmd_schedule(const ScheduleArgs& a) {
  const std::string ltext = read_file(a.layout_path);
  const std::string stext = read_file(a.schedule_path);
  const Layout layout = parse_layout(ltext);
  const Schedule schedule = parse_schedule(stext);
  const double duration =
      a.duration_ms > 0.0 ? ms_to_s(a.duration_ms) : schedule.duration();

  TransportOptions opts;
  opts.x_begin = a.range_lo_um * 1e-6;
  opts.x_end = a.range_hi_um * 1e-6;
  const ConveyorRecord rec = conveyor_transport(layout, schedule, duration,
                                                ms_to_s(a.dt_ms), species_rb87(), opts);
  const fs::path dir(a.out_dir);
  write_file(dir / "wells.csv", conveyor_to_csv(rec));
  write_sidecar(dir / "schedule_meta.json", "schedule", fnv1a(ltext + stext));
  int alive = 0;
  for (const auto& w : rec.wells) alive += w.alive ? 1 : 0;
  std::cout << rec.wells.size() << " wells tracked, " << alive << " alive at the end\n";
}

void add_build_commands(CLI::App& build, std::string& out_path) {
  build.require_subcommand(1);

  {
    auto* sg = build.add_subcommand("side-guide", "straight wire plus transverse bias");
    auto current = std::make_shared<double>(1.0);
    auto b0y = std::make_shared<double>(0.0);
    auto z0 = std::make_shared<double>(0.0);
    sg->add_option("--current", *current, "wire current [A]")->required();
    sg->add_option("--b0y", *b0y, "transverse bias [G]");
    sg->add_option("--z0", *z0, "guide height [um]");
    sg->callback([current, b0y, z0, &out_path]() {
      std::optional<double> ob0y, oz0;
      if (*b0y != 0.0) ob0y = gauss_to_tesla(*b0y);
      if (*z0 != 0.0) oz0 = um_to_m(*z0);
      const SideGuide g = make_side_guide(*current, ob0y, oz0);
      write_file(out_path, serialize_layout(g.layout));
      std::cout << json{{"z0_um", m_to_um(g.z0)},
                        {"b_G_per_cm", tesla_per_m_to_gauss_per_cm(g.b)}}
                       .dump(2)
                << "\n";
    });
  }
  {
    auto* ct = build.add_subcommand("crossing", "guide with one crossing wire");
    auto i0 = std::make_shared<double>(2.0);
    auto i1 = std::make_shared<double>(0.5);
    auto b0y = std::make_shared<double>(160.0);
    auto b0x = std::make_shared<double>(0.0);
    ct->add_option("--i0", *i0, "guide current [A]")->required();
    ct->add_option("--i1", *i1, "crossing current [A]")->required();
    ct->add_option("--b0y", *b0y, "transverse bias [G]")->required();
    ct->add_option("--b0x", *b0x, "axial bias [G]");
    ct->callback([i0, i1, b0y, b0x, &out_path]() {
      const CrossingTrap t = make_crossing_trap(*i0, *i1, gauss_to_tesla(*b0y),
                                                gauss_to_tesla(*b0x));
      write_file(out_path, serialize_layout(t.layout));
      std::cout << json{{"kind", t.kind == IntersectionKind::Trap ? "trap" : "repulsive"},
                        {"z0_um", m_to_um(t.z0)},
                        {"barrier_G", tesla_to_gauss(t.barrier)}}
                       .dump(2)
                << "\n";
    });
  }
  {
    auto* h = build.add_subcommand("h-trap", "guide with two crossing wires");
    auto i0 = std::make_shared<double>(2.0);
    auto i1 = std::make_shared<double>(0.5);
    auto i2 = std::make_shared<double>(0.5);
    auto d = std::make_shared<double>(100.0);
    auto b0y = std::make_shared<double>(160.0);
    auto b0x = std::make_shared<double>(0.0);
    h->add_option("--i0", *i0)->required();
    h->add_option("--i1", *i1)->required();
    h->add_option("--i2", *i2)->required();
    h->add_option("--spacing", *d, "crossing separation [um]")->required();
    h->add_option("--b0y", *b0y, "[G]")->required();
    h->add_option("--b0x", *b0x, "[G]");
    h->callback([i0, i1, i2, d, b0y, b0x, &out_path]() {
      const HTrap t = make_H_trap(*i0, *i1, *i2, um_to_m(*d), gauss_to_tesla(*b0y),
                                  gauss_to_tesla(*b0x));
      write_file(out_path, serialize_layout(t.layout));
      std::cout << json{{"z0_um", m_to_um(t.z0)}}.dump(2) << "\n";
    });
  }
  {
    auto* fw = build.add_subcommand("four-wire", "curvature-optimized trap");
    auto i0 = std::make_shared<double>(2.0);
    auto i1 = std::make_shared<double>(0.5);
    auto i2 = std::make_shared<double>(0.45);
    auto i3 = std::make_shared<double>(0.5);
    auto b0y = std::make_shared<double>(160.0);
    auto b0x = std::make_shared<double>(0.0);
    fw->add_option("--i0", *i0)->required();
    fw->add_option("--i1", *i1)->required();
    fw->add_option("--i2", *i2, "opposed center current [A]")->required();
    fw->add_option("--i3", *i3)->required();
    fw->add_option("--b0y", *b0y, "[G]")->required();
    fw->add_option("--b0x", *b0x, "[G]");
    fw->callback([i0, i1, i2, i3, b0y, b0x, &out_path]() {
      const FourWire t = make_four_wire(*i0, *i1, *i2, *i3, gauss_to_tesla(*b0y),
                                        gauss_to_tesla(*b0x));
      write_file(out_path, serialize_layout(t.layout));
      std::cout << json{{"z0_um", m_to_um(t.z0)},
                        {"predicted_Bmin_G", tesla_to_gauss(t.predicted_Bmin)}}
                       .dump(2)
                << "\n";
    });
  }
  {
    auto* rot = build.add_subcommand("rotatable", "bent-cross trap at a rotation angle");
    auto theta = std::make_shared<double>(90.0);
    rot->add_option("--theta", *theta, "rotation angle [deg, 0..90]")->required();
    rot->callback([theta, &out_path]() {
      const RotationState s = rotation_state(*theta);
      write_file(out_path, serialize_layout(make_rotatable_cross(s)));
      std::cout << json{{"theta_deg", s.theta_deg},
                        {"I1_A", s.I1},
                        {"I2_A", s.I2},
                        {"B0x_G", tesla_to_gauss(s.B0x)},
                        {"B0y_G", tesla_to_gauss(s.B0y)}}
                       .dump(2)
                << "\n";
    });
  }
  {
    auto* z = build.add_subcommand("elongated-z", "Z-shaped single-wire guide");
    auto i0 = std::make_shared<double>(1.0);
    auto b0y = std::make_shared<double>(24.0);
    auto central = std::make_shared<double>(7.0);
    z->add_option("--i0", *i0)->required();
    z->add_option("--b0y", *b0y, "[G]")->required();
    z->add_option("--central-length", *central, "[mm]");
    z->callback([i0, b0y, central, &out_path]() {
      const ElongatedZ t =
          make_elongated_Z(*i0, gauss_to_tesla(*b0y), mm_to_m(*central));
      write_file(out_path, serialize_layout(t.layout));
      std::cout << json{{"z0_um", m_to_um(t.z0)},
                        {"b_G_per_cm", tesla_per_m_to_gauss_per_cm(t.b)}}
                       .dump(2)
                << "\n";
    });
  }
  {
    auto* cv = build.add_subcommand("conveyor", "guide + modulation combs + holding wires");
    auto holding = std::make_shared<double>(400.0);
    auto ih = std::make_shared<double>(0.3);
    auto central = std::make_shared<double>(7.0);
    cv->add_option("--holding-x", *holding, "[um]");
    cv->add_option("--ih", *ih, "holding current, negative digs wells [A]");
    cv->add_option("--central-length", *central, "[mm]");
    cv->callback([holding, ih, central, &out_path]() {
      ConveyorParams p;
      p.holding_x = um_to_m(*holding);
      p.IH = *ih;
      p.central_length = mm_to_m(*central);
      write_file(out_path, serialize_layout(make_conveyor(p)));
      std::cout << json{{"spacing_um", m_to_um(p.spacing)},
                        {"lattice_period_um", m_to_um(2 * p.spacing)}}
                       .dump(2)
                << "\n";
    });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar-conductor magnetic microtrap toolkit"};
  app.require_subcommand(1);

  FieldArgs fa;
  auto* field = app.add_subcommand("field", "evaluate |B| on a grid");
  field->add_option("--layout", fa.layout_path)->required();
  field->add_option("--min", fa.min_s, "box corner 'x,y,z' [um]")->required();
  field->add_option("--max", fa.max_s, "box corner 'x,y,z' [um]")->required();
  field->add_option("--n", fa.n_s, "'nx,ny,nz'");
  field->add_flag("--components", fa.components, "write Bx,By,Bz columns too");
  field->add_option("--multipliers", fa.multipliers, "'NAME=VALUE,...'");
  field->add_option("--out", fa.out_dir, "output directory");

  ProfileArgs pa;
  auto* profile = app.add_subcommand("profile", "longitudinal B_min profile");
  profile->add_option("--layout", pa.layout_path)->required();
  profile->add_option("--range", pa.range_s, "'x0:x1' [um]")->required();
  profile->add_option("--n", pa.n, "number of slices");
  profile->add_option("--multipliers", pa.multipliers);
  profile->add_option("--out", pa.out_dir);

  TrapArgs ta;
  auto* trap = app.add_subcommand("trap", "locate and characterize a minimum");
  trap->add_option("--layout", ta.layout_path);
  trap->add_option("--seed-point", ta.seed_s, "'x,y,z' [um]");
  trap->add_option("--species", ta.species);
  trap->add_option("--multipliers", ta.multipliers);
  trap->add_option("--depth-box", ta.depth_box_s, "half extents 'hx,hy,hz' [um]");
  trap->add_option("--curvature-override", ta.curvature_s,
                   "'k1,k2,k3' [G/cm^2]: skip the field, report the chain");
  trap->add_option("--out", ta.out_path, "also write the report here");

  auto* build = app.add_subcommand("build", "emit a layout file");
  std::string build_out = "layout.json";
  build->add_option("--out", build_out, "layout file to write");
  add_build_commands(*build, build_out);

  auto* optimize = app.add_subcommand("optimize", "optimal crossing spacing");
  double oi0 = 2.0, oi1 = 0.5, ob0y = 160.0;
  optimize->add_option("--i0", oi0)->required();
  optimize->add_option("--i1", oi1)->required();
  optimize->add_option("--b0y", ob0y, "[G]")->required();

  auto* limits = app.add_subcommand("limits", "conductor electrical limits");
  double lw = 10.0, lh = 7.0, lrho = 2.2, li = 1.0, ljmax = 4.6e6;
  std::string limits_out;
  limits->add_option("--width", lw, "[um]")->required();
  limits->add_option("--height", lh, "[um]")->required();
  limits->add_option("--resistivity", lrho, "[uOhm cm]")->required();
  limits->add_option("--current", li, "[A]")->required();
  limits->add_option("--jmax", ljmax, "[A/cm^2]");
  limits->add_option("--out", limits_out);

  ScheduleArgs sa;
  auto* schedule = app.add_subcommand("schedule", "run a conveyor schedule");
  schedule->add_option("--layout", sa.layout_path)->required();
  schedule->add_option("--schedule", sa.schedule_path)->required();
  schedule->add_option("--duration", sa.duration_ms, "[ms], default: schedule length");
  schedule->add_option("--dt", sa.dt_ms, "[ms]");
  schedule->add_option("--range-lo", sa.range_lo_um, "[um]");
  schedule->add_option("--range-hi", sa.range_hi_um, "[um]");
  schedule->add_option("--out", sa.out_dir);

  CollideArgs ca;
  auto* collide = app.add_subcommand("collide", "linear collider run");
  collide->add_option("--layout", ca.layout_path)->required();
  collide->add_option("--schedule", ca.schedule_path)->required();
  collide->add_option("--release", ca.release_ms, "[ms]")->required();
  collide->add_option("--clouds", ca.clouds_s, "'x_left,x_right' [um]")->required();
  collide->add_option("--dt", ca.dt_ms, "[ms]");
  collide->add_option("--t-end", ca.t_end_ms, "[ms]");
  collide->add_option("--range-lo", ca.range_lo_um, "[um]");
  collide->add_option("--range-hi", ca.range_hi_um, "[um]");
  collide->add_option("--temperature", ca.temperature_uK, "[uK], 0 = CM point clouds");
  collide->add_option("--particles", ca.particles, "ensemble size, 0 = CM only");
  collide->add_option("--seed", ca.seed, "RNG seed");
  collide->add_option("--out", ca.out_dir);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
        return app.exit(e);
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }

    if (field->parsed()) cmd_field(fa);
    else if (profile->parsed()) cmd_profile(pa);
    else if (trap->parsed()) cmd_trap(ta);
    else if (optimize->parsed()) {
      const double a = optimize_spacing(oi0, oi1, gauss_to_tesla(ob0y));
      const double z0 = constants::mu0_over_2pi * std::abs(oi0) / gauss_to_tesla(ob0y);
      std::cout << json{{"a_star_um", m_to_um(a)},
                        {"z0_um", m_to_um(z0)},
                        {"a_star_over_z0", a / z0}}
                       .dump(2)
                << "\n";
    } else if (limits->parsed()) {
      // resistivity arrives in uOhm cm = 1e-8 Ohm m
      const ConductorLimits lim = conductor_limits(
          um_to_m(lw), um_to_m(lh), lrho * 1e-8, li, ljmax * 1e4);
      const std::string out = limits_to_json(lim);
      std::cout << out << "\n";
      if (!limits_out.empty()) write_file(limits_out, out);
    } else if (schedule->parsed()) {
      cmd_schedule(sa);
    } else if (collide->parsed()) {
      cmd_collide(ca);
    }
    // `build` subcommands run through their callbacks inside parse()
  } catch (const CliFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const UnitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidParams& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FieldZeroRisk& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
