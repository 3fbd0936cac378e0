#pragma once

#include <span>

namespace nac {

struct RateFit {
  double slope = 0.0;
  int used = 0;      // points in the regression
  int excluded = 0;  // nonpositive running minima dropped
};

/// Least-squares slope of log(running-min values[t]) against log t over
/// t in [first, last] (inclusive, t >= 1). The running minimum starts at
/// index 0. Nonpositive minima are excluded and counted.
RateFit fit_rate(std::span<const double> values, int first = 1, int last = -1);

}  // namespace nac
