#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "microtrap/errors.hpp"

namespace microtrap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Minimum separation of consecutive path points, and the closest approach at
// which a filament field is still evaluated.
inline constexpr double kMinPointSeparation = 1e-12;  // [m]
inline constexpr double kSingularityRadius = 1e-9;    // [m]

enum class ConductorModel { Thin, Ribbon };

struct CrossSection {
  double width;   // in-plane, perpendicular to the local current direction [m]
  double height;  // along +z, the conductor occupies z in [0, height] [m]
};

// A current-carrying polyline. Curved conductors are discretized by the
// layout author; the field engine only knows straight segments.
struct Conductor {
  std::vector<Vec3> path;                     // >= 2 points [m]
  double current = 0.0;                       // signed [A]
  std::optional<CrossSection> cross_section;
  ConductorModel model = ConductorModel::Thin;
  int n_w = 1;                                // ribbon subdivisions across width
  int n_h = 1;                                // ribbon subdivisions across height
  std::string label;                          // optional, target for channel bindings
};

// Idealized analytic element for tests and closed-form work.
struct InfiniteWire {
  Vec3 anchor = Vec3::Zero();        // [m]
  Vec3 direction = Vec3::UnitX();    // unit vector
  double current = 0.0;              // signed [A]
  std::string label;
};

// One named time-dependence channel. A multiplier scales the base currents of
// the bound conductors/wires and the bound bias components.
struct ChannelBinding {
  std::vector<std::string> conductors;   // conductor/infinite-wire labels
  std::vector<int> bias_components;      // 0=x, 1=y, 2=z
};

using ChannelValues = std::map<std::string, double>;

// One straight filament of the discretized layout. `fraction` is the share of
// the owning conductor's current it carries.
struct Filament {
  Vec3 a, b;
  std::size_t conductor;
  double fraction;
};

// Immutable scene: conductors + uniform bias + channel bindings. All time
// dependence enters through channel multipliers at evaluation time.
class Layout {
 public:
  Layout() = default;

  Layout(std::vector<Conductor> conductors, std::vector<InfiniteWire> wires,
         Vec3 bias, std::map<std::string, ChannelBinding> channels = {},
         bool include_gravity = false)
      : conductors_(std::move(conductors)),
        infinite_wires_(std::move(wires)),
        bias_(std::move(bias)),
        channels_(std::move(channels)),
        include_gravity_(include_gravity) {
    validate();
    build_filaments();
    index_channels();
  }

  const std::vector<Conductor>& conductors() const { return conductors_; }
  const std::vector<InfiniteWire>& infinite_wires() const { return infinite_wires_; }
  const Vec3& bias() const { return bias_; }
  const std::map<std::string, ChannelBinding>& channels() const { return channels_; }
  bool include_gravity() const { return include_gravity_; }
  const std::vector<Filament>& filaments() const { return filaments_; }

  double channel_value(const std::string& name, const ChannelValues& values) const {
    auto it = values.find(name);
    return it == values.end() ? 1.0 : it->second;  // unset channels stay at 1
  }

  double conductor_current(std::size_t i, const ChannelValues& values) const {
    double m = 1.0;
    if (!conductor_channel_[i].empty()) m = channel_value(conductor_channel_[i], values);
    return conductors_[i].current * m;
  }

  double infinite_wire_current(std::size_t i, const ChannelValues& values) const {
    double m = 1.0;
    if (!wire_channel_[i].empty()) m = channel_value(wire_channel_[i], values);
    return infinite_wires_[i].current * m;
  }

  Vec3 bias_at(const ChannelValues& values) const {
    Vec3 b = bias_;
    for (int c = 0; c < 3; ++c)
      if (!bias_channel_[c].empty()) b[c] *= channel_value(bias_channel_[c], values);
    return b;
  }

  // Ensures every multiplier key names an existing channel.
  void check_channel_values(const ChannelValues& values) const {
    for (const auto& [name, v] : values) {
      (void)v;
      if (!channels_.contains(name))
        throw ValidationError("unknown channel '" + name + "'");
    }
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < conductors_.size(); ++i) {
      const auto& c = conductors_[i];
      if (c.path.size() < 2)
        throw ValidationError("conductor " + std::to_string(i) + ": path needs >= 2 points");
      for (std::size_t k = 0; k + 1 < c.path.size(); ++k)
        if ((c.path[k + 1] - c.path[k]).norm() <= kMinPointSeparation)
          throw ValidationError("conductor " + std::to_string(i) +
                                ": consecutive path points coincide");
      if (c.model == ConductorModel::Ribbon) {
        if (!c.cross_section)
          throw ValidationError("conductor " + std::to_string(i) +
                                ": ribbon model requires a cross_section");
        if (c.n_w < 1 || c.n_h < 1)
          throw ValidationError("conductor " + std::to_string(i) +
                                ": ribbon subdivisions must be >= 1");
      }
      if (c.cross_section && (c.cross_section->width <= 0 || c.cross_section->height <= 0))
        throw ValidationError("conductor " + std::to_string(i) + ": cross_section must be positive");
    }
    for (std::size_t i = 0; i < infinite_wires_.size(); ++i) {
      if (std::abs(infinite_wires_[i].direction.norm() - 1.0) > 1e-12)
        throw ValidationError("infinite wire " + std::to_string(i) +
                              ": direction must have unit norm");
    }

    std::set<std::string> labels;
    auto check_label = [&](const std::string& l) {
      if (l.empty()) return;
      if (!labels.insert(l).second)
        throw ValidationError("duplicate element label '" + l + "'");
    };
    for (const auto& c : conductors_) check_label(c.label);
    for (const auto& w : infinite_wires_) check_label(w.label);

    for (const auto& [name, binding] : channels_) {
      if (name.empty()) throw ValidationError("channel with empty name");
      for (const auto& target : binding.conductors)
        if (!labels.contains(target))
          throw ValidationError("channel '" + name + "' binds unknown element '" + target + "'");
      for (int c : binding.bias_components)
        if (c < 0 || c > 2)
          throw ValidationError("channel '" + name + "' binds invalid bias component");
    }
  }

  void build_filaments() {
    filaments_.clear();
    for (std::size_t i = 0; i < conductors_.size(); ++i) {
      const auto& c = conductors_[i];
      // Thin model: one filament along the spine, lifted to the conductor's
      // mid-height when a cross-section is present (the body sits on z=0).
      if (c.model == ConductorModel::Thin) {
        const Vec3 lift = c.cross_section
                              ? Vec3(0, 0, 0.5 * c.cross_section->height)
                              : Vec3::Zero();
        for (std::size_t k = 0; k + 1 < c.path.size(); ++k)
          filaments_.push_back({c.path[k] + lift, c.path[k + 1] + lift, i, 1.0});
        continue;
      }
      // Ribbon model: n_w x n_h parallel sub-filaments, each centered in its
      // sub-rectangle of the cross-section and carrying an equal share.
      const double w = c.cross_section->width;
      const double h = c.cross_section->height;
      const double fraction = 1.0 / (c.n_w * c.n_h);
      for (std::size_t k = 0; k + 1 < c.path.size(); ++k) {
        const Vec3 a = c.path[k], b = c.path[k + 1];
        const Vec3 t = (b - a).normalized();
        Vec3 across = Vec3::UnitZ().cross(t);
        const double n = across.norm();
        if (n < 1e-9)
          throw ValidationError("conductor " + std::to_string(i) +
                                ": ribbon segment parallel to z");
        across /= n;
        for (int iw = 0; iw < c.n_w; ++iw) {
          const double dw = w * ((iw + 0.5) / c.n_w - 0.5);
          for (int ih = 0; ih < c.n_h; ++ih) {
            const double dz = h * (ih + 0.5) / c.n_h;
            const Vec3 off = dw * across + Vec3(0, 0, dz);
            filaments_.push_back({a + off, b + off, i, fraction});
          }
        }
      }
    }
  }

  void index_channels() {
    conductor_channel_.assign(conductors_.size(), "");
    wire_channel_.assign(infinite_wires_.size(), "");
    for (auto& s : bias_channel_) s.clear();
    for (const auto& [name, binding] : channels_) {
      for (const auto& target : binding.conductors) {
        for (std::size_t i = 0; i < conductors_.size(); ++i)
          if (conductors_[i].label == target) bind_slot(conductor_channel_[i], name, target);
        for (std::size_t i = 0; i < infinite_wires_.size(); ++i)
          if (infinite_wires_[i].label == target) bind_slot(wire_channel_[i], name, target);
      }
      for (int c : binding.bias_components) bind_slot(bias_channel_[c], name, "bias");
    }
  }

  static void bind_slot(std::string& slot, const std::string& channel, const std::string& target) {
    if (!slot.empty() && slot != channel)
      throw ValidationError("element '" + target + "' bound by two channels ('" + slot +
                            "', '" + channel + "')");
    slot = channel;
  }

  std::vector<Conductor> conductors_;
  std::vector<InfiniteWire> infinite_wires_;
  Vec3 bias_ = Vec3::Zero();
  std::map<std::string, ChannelBinding> channels_;
  bool include_gravity_ = false;

  std::vector<Filament> filaments_;
  std::vector<std::string> conductor_channel_;
  std::vector<std::string> wire_channel_;
  std::array<std::string, 3> bias_channel_;
};

}  // namespace microtrap
