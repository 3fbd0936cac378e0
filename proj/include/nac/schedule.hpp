#pragma once

#include <string>

namespace nac {

/// Outer-loop step size: adaptive eta_t = 1 / (lambda (t + 1)) or a constant
/// eta in (0, 1 / lambda).
struct StepSchedule {
  enum class Kind { adaptive, constant };
  Kind kind = Kind::adaptive;
  double eta = 0.0;

  static StepSchedule adaptive() { return {Kind::adaptive, 0.0}; }
  static StepSchedule constant(double eta) { return {Kind::constant, eta}; }
};

/// Throws ValidationError unless a constant eta lies strictly inside (0, 1/lambda).
void validate(const StepSchedule& schedule, double lambda);

double step_size(const StepSchedule& schedule, int t, double lambda);

/// Persistence factor of the parameter-drift bound: 1 for the adaptive
/// schedule, 1 - (1 - eta lambda)^t for a constant one.
double kappa(const StepSchedule& schedule, int t, double lambda);

std::string to_string(const StepSchedule& schedule);

}  // namespace nac
