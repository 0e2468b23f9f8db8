#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "microtrap/errors.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/schedule.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

// Layout and schedule files are JSON documents with explicit unit tags and a
// major.minor format version. Readers reject unknown keys and unknown major
// versions; writers always emit the current version in paper units.

inline constexpr const char* kFormatVersion = "1.0";

namespace io_detail {

using nlohmann::json;

inline json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw SyntaxError("malformed JSON document");
  return j;
}

inline void check_keys(const json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!obj.is_object()) throw SyntaxError(where + ": expected an object");
  for (const auto& [key, v] : obj.items()) {
    (void)v;
    if (!allowed.contains(key)) throw SyntaxError(where + ": unknown key '" + key + "'");
  }
}

inline void check_version(const json& j, const std::string& what) {
  if (!j.contains("format_version"))
    throw SyntaxError(what + ": missing format_version");
  const std::string v = j.at("format_version").get<std::string>();
  const auto dot = v.find('.');
  const std::string major = dot == std::string::npos ? v : v.substr(0, dot);
  if (major != "1")
    throw SyntaxError(what + ": unsupported format_version '" + v + "'");
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw SyntaxError(where + ": expected a number");
  return j.get<double>();
}

struct UnitSet {
  double length_to_m = 1e-6;   // default um
  double current_to_A = 1.0;   // default A
  double field_to_T = 1e-4;    // default G
  double time_to_s = 1e-3;     // default ms
};

inline UnitSet parse_units(const json& j) {
  UnitSet u;
  if (!j.contains("units")) throw UnitError("missing 'units' section");
  const json& units = j.at("units");
  check_keys(units, {"length", "current", "field", "time"}, "units");
  auto tag = [&](const char* key, const std::string& fallback) {
    return units.contains(key) ? units.at(key).get<std::string>() : fallback;
  };
  const std::string len = tag("length", "um");
  if (len == "um") u.length_to_m = 1e-6;
  else if (len == "mm") u.length_to_m = 1e-3;
  else if (len == "m") u.length_to_m = 1.0;
  else throw UnitError("unknown length unit '" + len + "'");
  const std::string cur = tag("current", "A");
  if (cur == "A") u.current_to_A = 1.0;
  else if (cur == "mA") u.current_to_A = 1e-3;
  else throw UnitError("unknown current unit '" + cur + "'");
  const std::string fld = tag("field", "G");
  if (fld == "G") u.field_to_T = 1e-4;
  else if (fld == "mT") u.field_to_T = 1e-3;
  else if (fld == "T") u.field_to_T = 1.0;
  else throw UnitError("unknown field unit '" + fld + "'");
  const std::string tim = tag("time", "ms");
  if (tim == "ms") u.time_to_s = 1e-3;
  else if (tim == "s") u.time_to_s = 1.0;
  else throw UnitError("unknown time unit '" + tim + "'");
  return u;
}

inline Vec3 parse_point(const json& j, double scale, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw SyntaxError(where + ": expected [x, y, z]");
  return Vec3(number(j[0], where) * scale, number(j[1], where) * scale,
              number(j[2], where) * scale);
}

}  // namespace io_detail

inline Layout parse_layout(const std::string& text) {
  using io_detail::json;
  using io_detail::check_keys;
  using io_detail::number;
  const json j = io_detail::parse_json(text);
  check_keys(j, {"format_version", "units", "conductors", "infinite_wires", "bias",
                 "channels", "gravity"}, "layout");
  io_detail::check_version(j, "layout");
  const auto units = io_detail::parse_units(j);

  std::vector<Conductor> conductors;
  if (j.contains("conductors")) {
    for (const auto& cj : j.at("conductors")) {
      check_keys(cj, {"label", "path", "current", "cross_section", "model"}, "conductor");
      Conductor c;
      if (cj.contains("label")) c.label = cj.at("label").get<std::string>();
      if (!cj.contains("path")) throw SyntaxError("conductor: missing path");
      for (const auto& pj : cj.at("path"))
        c.path.push_back(io_detail::parse_point(pj, units.length_to_m, "conductor path"));
      if (!cj.contains("current")) throw SyntaxError("conductor: missing current");
      c.current = number(cj.at("current"), "conductor current") * units.current_to_A;
      if (cj.contains("cross_section")) {
        const auto& xs = cj.at("cross_section");
        check_keys(xs, {"width", "height"}, "cross_section");
        c.cross_section = CrossSection{
            number(xs.at("width"), "cross_section width") * units.length_to_m,
            number(xs.at("height"), "cross_section height") * units.length_to_m};
      }
      if (cj.contains("model")) {
        const auto& mj = cj.at("model");
        check_keys(mj, {"kind", "n_w", "n_h"}, "model");
        const std::string kind = mj.at("kind").get<std::string>();
        if (kind == "thin") {
          c.model = ConductorModel::Thin;
        } else if (kind == "ribbon") {
          c.model = ConductorModel::Ribbon;
          c.n_w = mj.contains("n_w") ? mj.at("n_w").get<int>() : 1;
          c.n_h = mj.contains("n_h") ? mj.at("n_h").get<int>() : 1;
        } else {
          throw SyntaxError("conductor model kind must be 'thin' or 'ribbon'");
        }
      }
      conductors.push_back(std::move(c));
    }
  }

  std::vector<InfiniteWire> wires;
  if (j.contains("infinite_wires")) {
    for (const auto& wj : j.at("infinite_wires")) {
      check_keys(wj, {"label", "anchor", "direction", "current"}, "infinite_wire");
      InfiniteWire w;
      if (wj.contains("label")) w.label = wj.at("label").get<std::string>();
      w.anchor = io_detail::parse_point(wj.at("anchor"), units.length_to_m, "wire anchor");
      w.direction = io_detail::parse_point(wj.at("direction"), 1.0, "wire direction");
      w.current = number(wj.at("current"), "wire current") * units.current_to_A;
      wires.push_back(std::move(w));
    }
  }

  Vec3 bias = Vec3::Zero();
  if (j.contains("bias")) {
    const auto& bj = j.at("bias");
    check_keys(bj, {"x", "y", "z"}, "bias");
    if (bj.contains("x")) bias.x() = number(bj.at("x"), "bias.x") * units.field_to_T;
    if (bj.contains("y")) bias.y() = number(bj.at("y"), "bias.y") * units.field_to_T;
    if (bj.contains("z")) bias.z() = number(bj.at("z"), "bias.z") * units.field_to_T;
  }

  std::map<std::string, ChannelBinding> channels;
  if (j.contains("channels")) {
    for (const auto& [name, cj] : j.at("channels").items()) {
      check_keys(cj, {"conductors", "bias"}, "channel '" + name + "'");
      ChannelBinding binding;
      if (cj.contains("conductors"))
        for (const auto& t : cj.at("conductors"))
          binding.conductors.push_back(t.get<std::string>());
      if (cj.contains("bias")) {
        for (const auto& t : cj.at("bias")) {
          const std::string axis = t.get<std::string>();
          if (axis == "x") binding.bias_components.push_back(0);
          else if (axis == "y") binding.bias_components.push_back(1);
          else if (axis == "z") binding.bias_components.push_back(2);
          else throw SyntaxError("channel '" + name + "': bias component must be x|y|z");
        }
      }
      channels.emplace(name, std::move(binding));
    }
  }

  const bool gravity = j.contains("gravity") && j.at("gravity").get<bool>();
  return Layout(std::move(conductors), std::move(wires), bias, std::move(channels), gravity);
}

// Writes in um / A / G regardless of what the parsed document used.
inline std::string serialize_layout(const Layout& layout) {
  using io_detail::json;
  json j;
  j["format_version"] = kFormatVersion;
  j["units"] = {{"length", "um"}, {"current", "A"}, {"field", "G"}};
  j["conductors"] = json::array();
  for (const auto& c : layout.conductors()) {
    json cj;
    if (!c.label.empty()) cj["label"] = c.label;
    cj["path"] = json::array();
    for (const auto& p : c.path)
      cj["path"].push_back({m_to_um(p.x()), m_to_um(p.y()), m_to_um(p.z())});
    cj["current"] = c.current;
    if (c.cross_section)
      cj["cross_section"] = {{"width", m_to_um(c.cross_section->width)},
                             {"height", m_to_um(c.cross_section->height)}};
    if (c.model == ConductorModel::Ribbon)
      cj["model"] = {{"kind", "ribbon"}, {"n_w", c.n_w}, {"n_h", c.n_h}};
    j["conductors"].push_back(std::move(cj));
  }
  j["infinite_wires"] = json::array();
  for (const auto& w : layout.infinite_wires()) {
    json wj;
    if (!w.label.empty()) wj["label"] = w.label;
    wj["anchor"] = {m_to_um(w.anchor.x()), m_to_um(w.anchor.y()), m_to_um(w.anchor.z())};
    wj["direction"] = {w.direction.x(), w.direction.y(), w.direction.z()};
    wj["current"] = w.current;
    j["infinite_wires"].push_back(std::move(wj));
  }
  j["bias"] = {{"x", tesla_to_gauss(layout.bias().x())},
               {"y", tesla_to_gauss(layout.bias().y())},
               {"z", tesla_to_gauss(layout.bias().z())}};
  j["channels"] = json::object();
  for (const auto& [name, binding] : layout.channels()) {
    json cj;
    cj["conductors"] = binding.conductors;
    json axes = json::array();
    for (int c : binding.bias_components) axes.push_back(std::string(1, "xyz"[c]));
    cj["bias"] = std::move(axes);
    j["channels"][name] = std::move(cj);
  }
  j["gravity"] = layout.include_gravity();
  return j.dump(2);
}

inline Schedule parse_schedule(const std::string& text) {
  using io_detail::json;
  using io_detail::check_keys;
  using io_detail::number;
  const json j = io_detail::parse_json(text);
  check_keys(j, {"format_version", "units", "duration", "channels"}, "schedule");
  io_detail::check_version(j, "schedule");
  const auto units = io_detail::parse_units(j);
  if (!j.contains("duration")) throw SyntaxError("schedule: missing duration");
  const double duration = number(j.at("duration"), "duration") * units.time_to_s;

  std::map<std::string, std::vector<ScheduleSegment>> channels;
  if (j.contains("channels")) {
    for (const auto& [name, segsj] : j.at("channels").items()) {
      std::vector<ScheduleSegment> segs;
      for (const auto& sj : segsj) {
        check_keys(sj, {"t0", "t1", "kind", "from", "to"}, "schedule segment");
        ScheduleSegment s;
        s.t0 = number(sj.at("t0"), "t0") * units.time_to_s;
        s.t1 = number(sj.at("t1"), "t1") * units.time_to_s;
        const std::string kind = sj.at("kind").get<std::string>();
        if (kind == "constant") s.kind = SegmentKind::Constant;
        else if (kind == "ramp") s.kind = SegmentKind::Ramp;
        else if (kind == "cos2") s.kind = SegmentKind::Cos2;
        else if (kind == "step") s.kind = SegmentKind::Step;
        else throw SyntaxError("schedule segment kind must be constant|ramp|cos2|step");
        s.from = number(sj.at("from"), "from");
        s.to = sj.contains("to") ? number(sj.at("to"), "to") : s.from;
        segs.push_back(s);
      }
      channels.emplace(name, std::move(segs));
    }
  }
  return Schedule(duration, std::move(channels));
}

inline std::string serialize_schedule(const Schedule& schedule) {
  using io_detail::json;
  json j;
  j["format_version"] = kFormatVersion;
  j["units"] = {{"time", "ms"}};
  j["duration"] = s_to_ms(schedule.duration());
  j["channels"] = json::object();
  for (const auto& [name, segs] : schedule.channels()) {
    json arr = json::array();
    for (const auto& s : segs) {
      const char* kind = s.kind == SegmentKind::Constant ? "constant"
                         : s.kind == SegmentKind::Ramp   ? "ramp"
                         : s.kind == SegmentKind::Cos2   ? "cos2"
                                                         : "step";
      arr.push_back({{"t0", s_to_ms(s.t0)},
                     {"t1", s_to_ms(s.t1)},
                     {"kind", kind},
                     {"from", s.from},
                     {"to", s.to}});
    }
    j["channels"][name] = std::move(arr);
  }
  return j.dump(2);
}

}  // namespace microtrap
