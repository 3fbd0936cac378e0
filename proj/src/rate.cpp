#include "nac/rate.hpp"

#include <algorithm>
#include <cmath>

#include "nac/error.hpp"

namespace nac {

RateFit fit_rate(std::span<const double> values, int first, int last) {
  const int n = static_cast<int>(values.size());
  if (last < 0 || last >= n) last = n - 1;
  first = std::max(first, 1);
  RateFit fit;
  double running = values.empty() ? 0.0 : values[0];
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int t = 0; t <= last; ++t) {
    running = std::min(running, values[t]);
    if (t < first) continue;
    if (!(running > 0.0)) {
      ++fit.excluded;
      continue;
    }
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(running);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.used;
  }
  if (fit.used < 2) throw ValidationError("rate fit needs at least two positive points");
  const double denom = fit.used * sxx - sx * sx;
  fit.slope = (fit.used * sxy - sx * sy) / denom;
  return fit;
}

}  // namespace nac
