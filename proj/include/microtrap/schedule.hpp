#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "microtrap/errors.hpp"
#include "microtrap/layout.hpp"
#include "microtrap/units.hpp"

namespace microtrap {

enum class SegmentKind { Constant, Ramp, Cos2, Step };

// One piece of a channel's multiplier history on [t0, t1].
//   Constant: value = from
//   Ramp:     linear from -> to
//   Cos2:     from + (to-from) * (1 - cos(pi u)) / 2, u = (t-t0)/(t1-t0)
//   Step:     value = to on the whole segment; the jump from `from` happens
//             at t0 and the schedule is evaluated right-continuously there.
struct ScheduleSegment {
  double t0, t1;  // [s]
  SegmentKind kind;
  double from, to;
};

// Piecewise multiplier histories for named channels on a closed interval
// [0, duration]. Continuous except across declared Step segments.
class Schedule {
 public:
  Schedule() = default;

  Schedule(double duration, std::map<std::string, std::vector<ScheduleSegment>> channels)
      : duration_(duration), channels_(std::move(channels)) {
    validate();
  }

  double duration() const { return duration_; }
  const std::map<std::string, std::vector<ScheduleSegment>>& channels() const {
    return channels_;
  }

  double value(const std::string& channel, double t) const {
    check_time(t);
    auto it = channels_.find(channel);
    if (it == channels_.end())
      throw ValidationError("schedule has no channel '" + channel + "'");
    const auto& segs = it->second;
    // Right-continuous lookup; t == duration falls into the last segment.
    auto seg = std::upper_bound(segs.begin(), segs.end(), t,
                                [](double v, const ScheduleSegment& s) { return v < s.t1; });
    if (seg == segs.end()) seg = std::prev(segs.end());
    return eval(*seg, t);
  }

  ChannelValues values_at(double t) const {
    check_time(t);
    ChannelValues out;
    for (const auto& [name, segs] : channels_) {
      (void)segs;
      out[name] = value(name, t);
    }
    return out;
  }

 private:
  static double eval(const ScheduleSegment& s, double t) {
    switch (s.kind) {
      case SegmentKind::Constant: return s.from;
      case SegmentKind::Step: return s.to;
      case SegmentKind::Ramp: {
        const double u = (t - s.t0) / (s.t1 - s.t0);
        return s.from + (s.to - s.from) * u;
      }
      case SegmentKind::Cos2: {
        const double u = (t - s.t0) / (s.t1 - s.t0);
        return s.from + (s.to - s.from) * 0.5 * (1.0 - std::cos(constants::pi * u));
      }
    }
    return s.from;
  }

  static double end_value(const ScheduleSegment& s) {
    switch (s.kind) {
      case SegmentKind::Constant: return s.from;
      default: return s.to;
    }
  }

  static double start_value(const ScheduleSegment& s) {
    switch (s.kind) {
      case SegmentKind::Constant: return s.from;
      case SegmentKind::Step: return s.to;  // value right after the declared jump
      default: return s.from;
    }
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= duration_))
      throw ScheduleRangeError("schedule evaluated at t=" + std::to_string(t) +
                               " outside [0, " + std::to_string(duration_) + "]");
  }

  void validate() const {
    if (!(duration_ > 0)) throw ValidationError("schedule duration must be positive");
    for (const auto& [name, segs] : channels_) {
      if (segs.empty())
        throw ValidationError("schedule channel '" + name + "' has no segments");
      if (std::abs(segs.front().t0) > 1e-15)
        throw ValidationError("schedule channel '" + name + "' must start at t=0");
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        const bool zero_length_step = s.kind == SegmentKind::Step && s.t1 == s.t0;
        if (!(s.t1 > s.t0) && !zero_length_step)
          throw ValidationError("schedule channel '" + name + "': segment " +
                                std::to_string(i) + " has non-positive length");
        if (i > 0) {
          if (std::abs(s.t0 - segs[i - 1].t1) > 1e-12)
            throw ValidationError("schedule channel '" + name + "': segments must tile [0,T]");
          // Continuity across the boundary unless a Step declares the jump.
          if (s.kind != SegmentKind::Step) {
            const double prev = end_value(segs[i - 1]);
            const double here = start_value(s);
            if (std::abs(here - prev) > 1e-9 * std::max(1.0, std::abs(prev)))
              throw ValidationError("schedule channel '" + name +
                                    "': undeclared discontinuity at t=" + std::to_string(s.t0));
          }
        }
      }
      if (std::abs(segs.back().t1 - duration_) > 1e-12)
        throw ValidationError("schedule channel '" + name + "' must end at t=duration");
    }
  }

  double duration_ = 0.0;
  std::map<std::string, std::vector<ScheduleSegment>> channels_;
};

}  // namespace microtrap
