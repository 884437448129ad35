#ifndef AUTODA_CONTROLLER_HPP
#define AUTODA_CONTROLLER_HPP

#include <optional>
#include <span>
#include <vector>

namespace autoda {

/// Negative-feedback step-size control: keeps a decayed success rate p and
/// scales the hyperparameters by f(p)^damping after every trial, where f is
/// piecewise linear through (0, lo), (target, 1) and (1, hi).
struct ControllerConfig {
  double alpha = 0.95;  // decay of the success rate
  double lo = 0.5;
  double hi = 1.5;
  double target = 0.25;
  double damping = 0.1;
  std::optional<double> p_init;  // defaults to target

  void validate() const;
  double initial_rate() const { return p_init.value_or(target); }
};

/// p is clamped into [0, 1].
double controller_f(double p, const ControllerConfig &cfg);

/// p ← α·p + (1−α)·k
double update_success_rate(double p, bool success, const ControllerConfig &cfg);

/// s ← s·f(p)^damping for every adaptive hyperparameter.
void scale_hyperparams(double p, std::span<double> hyper, const std::vector<bool> &adaptive,
                       const ControllerConfig &cfg);

}

#endif //AUTODA_CONTROLLER_HPP
