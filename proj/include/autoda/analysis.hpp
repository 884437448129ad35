#ifndef AUTODA_ANALYSIS_HPP
#define AUTODA_ANALYSIS_HPP

#include "autoda/dsl.hpp"

#include <string>
#include <vector>

namespace autoda {

/// Values the return value transitively depends on.
class LiveSet {
 public:
  LiveSet() = default;
  explicit LiveSet(std::vector<bool> live) : live_(std::move(live)) {}

  bool contains(ValueId id) const { return id.index < live_.size() && live_[id.index]; }
  std::size_t size() const;

 private:
  std::vector<bool> live_;
};

LiveSet live_set(const SsaProgram &p);

/// Body positions whose results never reach the return value.
std::vector<std::size_t> dead_instructions(const SsaProgram &p);

/// `p` without its dead instructions; value ids are kept.
SsaProgram strip_dead(const SsaProgram &p);

struct InputsCheck {
  bool pass = true;
  // Inputs first (x0, x, n), then hyperparameters; first entry is the reason.
  std::vector<ValueId> missing;
  // e.g. "unused: v2 (x), s0 (hyperparameter)"
  std::string reason;
};

/// Passes iff x0, x, n (and, when `require_hyperparams`, every hyperparameter)
/// are live.
InputsCheck inputs_check(const SsaProgram &p, bool require_hyperparams = true);

}

#endif //AUTODA_ANALYSIS_HPP
