#include "autoda/interpreter.hpp"

#include "autoda/error.hpp"

#include <fmt/format.h>

namespace autoda {

namespace {

void check_args(std::size_t dim, std::size_t n_hyper, std::span<const double> hyper,
                std::span<const double> x0, std::span<const double> x, std::span<const double> n) {
  if (hyper.size() != n_hyper)
    throw ProgramError(fmt::format("expected {} hyperparameter values, got {}", n_hyper, hyper.size()));
  if (x0.size() != dim || x.size() != dim || n.size() != dim)
    throw ProgramError(fmt::format("input dimension mismatch: machine dim {}, inputs {}/{}/{}", dim,
                                   x0.size(), x.size(), n.size()));
}

// Executes one instruction against storage addressed by index.
template <class Ins>
inline void step(const Ins &ins, double *scalars, double *vectors, std::size_t dim) {
  auto vec = [&](auto id) { return vectors + static_cast<std::size_t>(id.index) * dim; };
  const auto &a = ins.args;
  switch (ins.op) {
    case OpCode::add_ss:
    case OpCode::sub_ss:
    case OpCode::mul_ss:
    case OpCode::div_ss:
      scalars[ins.dest.index] = kernel::scalar(ins.op, scalars[a[0].index], scalars[a[1].index]);
      break;
    case OpCode::add_vv:
    case OpCode::sub_vv:
      kernel::vv(ins.op, vec(a[0]), vec(a[1]), vec(ins.dest), dim);
      break;
    case OpCode::mul_vs:
    case OpCode::div_vs:
      kernel::vs(ins.op, vec(a[0]), scalars[a[1].index], vec(ins.dest), dim);
      break;
    case OpCode::dot_vv:
      scalars[ins.dest.index] = kernel::dot(vec(a[0]), vec(a[1]), dim);
      break;
    case OpCode::norm_v:
      scalars[ins.dest.index] = kernel::norm(vec(a[0]), dim);
      break;
  }
}

template <class Id>
void load(std::span<const double> src, Id id, std::vector<double> &vectors, std::size_t dim) {
  std::copy(src.begin(), src.end(), vectors.begin() + static_cast<std::ptrdiff_t>(id.index * dim));
}

}

Value eval_op(OpCode op, std::span<const Value> operands) {
  const auto &info = op_info(op);
  if (operands.size() != info.arity)
    throw ProgramError(fmt::format("{} takes {} operands", info.name, info.arity));
  std::size_t dim = 0;
  bool have_dim = false;
  for (unsigned i = 0; i < info.arity; ++i) {
    const bool is_vec = std::holds_alternative<Vector>(operands[i]);
    if (is_vec != (info.params[i] == Kind::vector))
      throw ProgramError(fmt::format("{}: operand {} has the wrong kind", info.name, i + 1));
    if (is_vec) {
      const auto sz = std::get<Vector>(operands[i]).size();
      if (have_dim && sz != dim) throw ProgramError(fmt::format("{}: vector dimension mismatch", info.name));
      dim = sz;
      have_dim = true;
    }
  }
  auto S = [&](unsigned i) { return std::get<double>(operands[i]); };
  auto V = [&](unsigned i) { return std::get<Vector>(operands[i]).data(); };
  switch (op) {
    case OpCode::add_ss:
    case OpCode::sub_ss:
    case OpCode::mul_ss:
    case OpCode::div_ss:
      return kernel::scalar(op, S(0), S(1));
    case OpCode::add_vv:
    case OpCode::sub_vv: {
      Vector r(dim);
      kernel::vv(op, V(0), V(1), r.data(), dim);
      return r;
    }
    case OpCode::mul_vs:
    case OpCode::div_vs: {
      Vector r(dim);
      kernel::vs(op, V(0), S(1), r.data(), dim);
      return r;
    }
    case OpCode::dot_vv:
      return kernel::dot(V(0), V(1), dim);
    case OpCode::norm_v:
      return kernel::norm(V(0), dim);
  }
  return 0.0;
}

std::span<const double> SsaMachine::run(const SsaProgram &p, std::span<const double> hyper,
                                        std::span<const double> x0, std::span<const double> x,
                                        std::span<const double> n) {
  check_args(dim_, p.hyperparams.size(), hyper, x0, x, n);
  const std::size_t count = p.value_count();
  if (scalars_.size() < count) scalars_.resize(count);
  if (vectors_.size() < count * dim_) vectors_.resize(count * dim_);
  for (std::size_t i = 0; i < hyper.size(); ++i) scalars_[p.hyperparams[i].id.index] = hyper[i];
  load(x0, p.inputs[0], vectors_, dim_);
  load(x, p.inputs[1], vectors_, dim_);
  load(n, p.inputs[2], vectors_, dim_);
  for (const auto &ins : p.body) step(ins, scalars_.data(), vectors_.data(), dim_);
  return {vectors_.data() + static_cast<std::size_t>(p.return_id.index) * dim_, dim_};
}

std::span<const double> TacMachine::run(const TacProgram &p, std::span<const double> hyper,
                                        std::span<const double> x0, std::span<const double> x,
                                        std::span<const double> n) {
  check_args(dim_, p.hyperparams.size(), hyper, x0, x, n);
  if (scalars_.size() < p.n_scalar_slots) scalars_.resize(p.n_scalar_slots);
  if (vectors_.size() < p.n_vector_slots * dim_) vectors_.resize(p.n_vector_slots * dim_);
  for (std::size_t i = 0; i < hyper.size(); ++i) scalars_[p.hyperparams[i].slot.index] = hyper[i];
  load(x0, p.inputs[0], vectors_, dim_);
  load(x, p.inputs[1], vectors_, dim_);
  load(n, p.inputs[2], vectors_, dim_);
  for (const auto &ins : p.body) step(ins, scalars_.data(), vectors_.data(), dim_);
  return {vectors_.data() + static_cast<std::size_t>(p.return_slot.index) * dim_, dim_};
}

Vector run_ssa(const SsaProgram &p, std::span<const double> hyper, std::span<const double> x0,
               std::span<const double> x, std::span<const double> n) {
  SsaMachine m(x0.size());
  auto r = m.run(p, hyper, x0, x, n);
  return {r.begin(), r.end()};
}

Vector run_tac(const TacProgram &p, std::span<const double> hyper, std::span<const double> x0,
               std::span<const double> x, std::span<const double> n) {
  TacMachine m(x0.size());
  auto r = m.run(p, hyper, x0, x, n);
  return {r.begin(), r.end()};
}

}
