#pragma once

#include <stdexcept>
#include <string>

namespace microtrap {

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Layout / schedule file problems
struct SyntaxError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct UnitError : Error { using Error::Error; };

// Field evaluation
struct FieldSingularity : Error { using Error::Error; };
struct DegenerateSegment : Error { using Error::Error; };
struct ZeroFieldRegion : Error { using Error::Error; };

// Trap analysis
struct NoConvergence : Error { using Error::Error; };
struct EscapedDomain : Error { using Error::Error; };
struct NoGuide : Error { using Error::Error; };

struct SliceLost : Error {
  SliceLost(const std::string& msg, double last_good)
      : Error(msg), last_good_x(last_good) {}
  double last_good_x;  // [m] last axis position with a converged slice
};

// Builders
struct InvalidParams : Error { using Error::Error; };
struct FieldZeroRisk : Error { using Error::Error; };

// Schedules / dynamics
struct ScheduleRangeError : Error { using Error::Error; };
struct StepTooLarge : Error { using Error::Error; };
struct EmptyCloud : Error { using Error::Error; };

}  // namespace microtrap
