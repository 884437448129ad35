#ifndef AUTODA_GENERATOR_HPP
#define AUTODA_GENERATOR_HPP

#include "autoda/dsl.hpp"
#include "autoda/rng.hpp"

#include <cstdint>
#include <vector>

namespace autoda {

struct GenConfig {
  std::size_t max_len = 20;  // includes the predefined operations
  std::size_t n_hyperparams = 1;
  double hyperparam_init = 0.01;
  // Weight of a not-yet-consumed value relative to a consumed one when
  // drawing operands. 1 disables the compact-program prior.
  double unused_bias = 4.0;
  std::uint64_t seed = 0;
  bool predefined = true;

  void validate() const;
};

/// Incrementally builds an SSA program with fresh, increasing value ids and
/// tracks which values have been consumed.
class ProgramBuilder {
 public:
  ProgramBuilder(std::size_t n_hyperparams, double hyperparam_init);

  ValueId append(OpCode op, ValueId a, ValueId b = {});

  const std::vector<ValueId> &values(Kind k) const { return k == Kind::scalar ? scalars_ : vectors_; }
  bool used(ValueId id) const { return used_[id.index]; }
  const SsaProgram &program() const { return p_; }
  std::size_t length() const { return p_.body.size(); }

  ValueId x0() const { return p_.inputs[0]; }
  ValueId x() const { return p_.inputs[1]; }
  ValueId noise() const { return p_.inputs[2]; }

  /// Sets the return value to the last instruction's result.
  SsaProgram finish() &&;

 private:
  ValueId fresh(Kind k);

  SsaProgram p_;
  std::uint32_t next_ = 0;
  std::vector<ValueId> scalars_;
  std::vector<ValueId> vectors_;
  std::vector<bool> used_;
};

struct Predefined {
  ValueId v;  // x0 - x
  ValueId d;  // ‖v‖
  ValueId u;  // v / d
};

/// Appends v = x0 − x, d = ‖v‖₂, u = v / d.
Predefined emit_predefined(ProgramBuilder &b);

/// Random program of exactly cfg.max_len instructions ending in a
/// vector-valued operation.
SsaProgram gen_random(const GenConfig &cfg, Rng &rng);

/// Natural-log probability that gen_random produces `p` under `cfg`
/// (−inf when it cannot).
double generation_log_prob(const SsaProgram &p, const GenConfig &cfg);

}

#endif //AUTODA_GENERATOR_HPP
