#include "autoda/generator.hpp"

#include "autoda/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autoda {

void GenConfig::validate() const {
  if (max_len < (predefined ? 4u : 1u))
    throw ConfigError(predefined ? "max_len must be at least 4 (three predefined operations plus one)"
                                 : "max_len must be at least 1");
  if (!(unused_bias >= 1.0) || !std::isfinite(unused_bias)) throw ConfigError("unused_bias must be finite and >= 1");
}

ProgramBuilder::ProgramBuilder(std::size_t n_hyperparams, double hyperparam_init) {
  constexpr std::size_t typical = 32;
  scalars_.reserve(typical);
  vectors_.reserve(typical);
  used_.reserve(typical);
  p_.body.reserve(typical);
  for (std::size_t i = 0; i < n_hyperparams; ++i) p_.hyperparams.push_back({fresh(Kind::scalar), hyperparam_init, false});
  for (auto &in : p_.inputs) in = fresh(Kind::vector);
}

ValueId ProgramBuilder::fresh(Kind k) {
  ValueId id{next_++, k};
  (k == Kind::scalar ? scalars_ : vectors_).push_back(id);
  used_.push_back(false);
  return id;
}

ValueId ProgramBuilder::append(OpCode op, ValueId a, ValueId b) {
  const auto &info = op_info(op);
  SsaInstr ins{{}, op, {a, b}};
  for (auto arg : ins.operands()) used_[arg.index] = true;
  ins.dest = fresh(info.result);
  p_.body.push_back(ins);
  return ins.dest;
}

SsaProgram ProgramBuilder::finish() && {
  if (p_.body.empty()) throw ProgramError("program has no instructions");
  p_.return_id = p_.body.back().dest;
  return std::move(p_);
}

Predefined emit_predefined(ProgramBuilder &b) {
  Predefined out;
  out.v = b.append(OpCode::sub_vv, b.x0(), b.x());
  out.d = b.append(OpCode::norm_v, out.v);
  out.u = b.append(OpCode::div_vs, out.v, out.d);
  return out;
}

namespace {

bool feasible(const ProgramBuilder &b, OpCode op) {
  const auto &info = op_info(op);
  for (unsigned i = 0; i < info.arity; ++i)
    if (b.values(info.params[i]).empty()) return false;
  return true;
}

struct OpSet {
  std::array<OpCode, all_ops.size()> ops{};
  std::size_t n = 0;

  std::size_t size() const { return n; }
  OpCode operator[](std::size_t i) const { return ops[i]; }
  const OpCode *begin() const { return ops.data(); }
  const OpCode *end() const { return ops.data() + n; }
};

template <std::size_t N>
OpSet feasible_ops(const ProgramBuilder &b, const std::array<OpCode, N> &ops) {
  OpSet out;
  for (auto op : ops)
    if (feasible(b, op)) out.ops[out.n++] = op;
  return out;
}

double weight(const ProgramBuilder &b, ValueId id, double bias) { return b.used(id) ? 1.0 : bias; }

double total_weight(const ProgramBuilder &b, Kind k, double bias) {
  double t = 0.0;
  for (auto id : b.values(k)) t += weight(b, id, bias);
  return t;
}

ValueId draw_operand(const ProgramBuilder &b, Kind k, double bias, Rng &rng) {
  const auto &pool = b.values(k);
  double r = rng.uniform() * total_weight(b, k, bias);
  for (auto id : pool) {
    r -= weight(b, id, bias);
    if (r < 0.0) return id;
  }
  return pool.back();
}

}

SsaProgram gen_random(const GenConfig &cfg, Rng &rng) {
  cfg.validate();
  ProgramBuilder b(cfg.n_hyperparams, cfg.hyperparam_init);
  if (cfg.predefined) emit_predefined(b);
  while (b.length() < cfg.max_len) {
    const bool last = b.length() + 1 == cfg.max_len;
    const auto ops = last ? feasible_ops(b, vector_result_ops) : feasible_ops(b, all_ops);
    const OpCode op = ops[rng.below(ops.size())];
    const auto &info = op_info(op);
    // Both operands are drawn against the same usage state.
    std::array<ValueId, 2> args{};
    for (unsigned i = 0; i < info.arity; ++i) args[i] = draw_operand(b, info.params[i], cfg.unused_bias, rng);
    b.append(op, args[0], args[1]);
  }
  return std::move(b).finish();
}

double generation_log_prob(const SsaProgram &p, const GenConfig &cfg) {
  constexpr double impossible = -std::numeric_limits<double>::infinity();
  cfg.validate();
  if (p.body.size() != cfg.max_len || p.hyperparams.size() != cfg.n_hyperparams) return impossible;
  ProgramBuilder b(cfg.n_hyperparams, cfg.hyperparam_init);
  for (std::size_t i = 0; i < p.hyperparams.size(); ++i)
    if (p.hyperparams[i] != b.program().hyperparams[i]) return impossible;
  if (p.inputs != b.program().inputs) return impossible;

  double lp = 0.0;
  std::size_t start = 0;
  if (cfg.predefined) {
    ProgramBuilder ref = b;
    emit_predefined(ref);
    for (std::size_t i = 0; i < 3; ++i)
      if (!(p.body[i] == ref.program().body[i])) return impossible;
    b = std::move(ref);
    start = 3;
  }
  for (std::size_t i = start; i < p.body.size(); ++i) {
    const auto &ins = p.body[i];
    const bool last = i + 1 == cfg.max_len;
    const auto ops = last ? feasible_ops(b, vector_result_ops) : feasible_ops(b, all_ops);
    if (std::find(ops.begin(), ops.end(), ins.op) == ops.end()) return impossible;
    lp -= std::log(static_cast<double>(ops.size()));
    const auto &info = op_info(ins.op);
    for (unsigned k = 0; k < info.arity; ++k) {
      const auto &pool = b.values(info.params[k]);
      if (std::find(pool.begin(), pool.end(), ins.args[k]) == pool.end()) return impossible;
      lp += std::log(weight(b, ins.args[k], cfg.unused_bias) / total_weight(b, info.params[k], cfg.unused_bias));
    }
    if (b.append(ins.op, ins.args[0], ins.args[1]) != ins.dest) return impossible;
  }
  if (p.return_id != p.body.back().dest) return impossible;
  return lp;
}

}
