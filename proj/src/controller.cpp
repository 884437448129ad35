#include "autoda/controller.hpp"

#include "autoda/error.hpp"

#include <algorithm>
#include <cmath>

namespace autoda {

void ControllerConfig::validate() const {
  if (!(0.0 < lo && lo < 1.0 && 1.0 < hi)) throw ConfigError("controller needs 0 < lo < 1 < hi");
  if (!(0.0 < target && target < 1.0)) throw ConfigError("controller target must lie in (0, 1)");
  if (!(0.0 < alpha && alpha < 1.0)) throw ConfigError("controller alpha must lie in (0, 1)");
  if (!(damping > 0.0)) throw ConfigError("controller damping must be positive");
  if (p_init && !(*p_init >= 0.0 && *p_init <= 1.0)) throw ConfigError("controller p_init must lie in [0, 1]");
}

double controller_f(double p, const ControllerConfig &cfg) {
  p = std::clamp(p, 0.0, 1.0);
  if (p <= cfg.target) return cfg.lo + (1.0 - cfg.lo) * (p / cfg.target);
  return 1.0 + (cfg.hi - 1.0) * ((p - cfg.target) / (1.0 - cfg.target));
}

double update_success_rate(double p, bool success, const ControllerConfig &cfg) {
  return cfg.alpha * p + (1.0 - cfg.alpha) * (success ? 1.0 : 0.0);
}

void scale_hyperparams(double p, std::span<double> hyper, const std::vector<bool> &adaptive,
                       const ControllerConfig &cfg) {
  const double factor = std::pow(controller_f(p, cfg), cfg.damping);
  for (std::size_t i = 0; i < hyper.size(); ++i)
    if (i >= adaptive.size() || adaptive[i]) hyper[i] *= factor;
}

}
