#include "autoda/dsl.hpp"

#include "autoda/error.hpp"

#include <fmt/format.h>

namespace autoda {

namespace {

constexpr Kind S = Kind::scalar;
constexpr Kind V = Kind::vector;

constexpr std::array<OpInfo, 10> op_table{{
    {"ADD.SS", "ADD", 2, {S, S}, S},
    {"SUB.SS", "SUB", 2, {S, S}, S},
    {"MUL.SS", "MUL", 2, {S, S}, S},
    {"DIV.SS", "DIV", 2, {S, S}, S},
    {"ADD.VV", "ADD", 2, {V, V}, V},
    {"SUB.VV", "SUB", 2, {V, V}, V},
    {"MUL.VS", "MUL", 2, {V, S}, V},
    {"DIV.VS", "DIV", 2, {V, S}, V},
    {"DOT.VV", "DOT", 2, {V, V}, S},
    {"NORM.V", "NORM", 1, {V, V}, S},
}};

std::string describe(const SsaInstr &ins) {
  std::string s = to_string(ins.dest) + " = " + std::string(op_info(ins.op).name) + "(";
  bool first = true;
  for (auto a : ins.operands()) {
    if (!first) s += ",";
    s += to_string(a);
    first = false;
  }
  return s + ")";
}

// `where` builds the error location lazily; validation runs on every
// generated program.
template <class Id, class Where>
void check_signature(OpCode op, Id dest, std::span<const Id> args, const Where &where) {
  const auto &info = op_info(op);
  if (dest.kind != info.result)
    throw ProgramError(where() + ": result kind does not match " + std::string(info.name));
  for (unsigned i = 0; i < info.arity; ++i)
    if (args[i].kind != info.params[i])
      throw ProgramError(where() + ": operand " + std::to_string(i + 1) + " kind does not match " +
                         std::string(info.name));
}

}

const OpInfo &op_info(OpCode op) { return op_table[static_cast<std::size_t>(op)]; }

std::optional<OpCode> resolve_op(std::string_view mnemonic, std::span<const Kind> kinds) {
  for (auto op : all_ops) {
    const auto &info = op_info(op);
    if (mnemonic != info.mnemonic && mnemonic != info.name) continue;
    if (kinds.size() != info.arity) continue;
    bool ok = true;
    for (unsigned i = 0; i < info.arity; ++i) ok = ok && kinds[i] == info.params[i];
    if (ok) return op;
  }
  return std::nullopt;
}

std::string to_string(ValueId id) { return fmt::format("{}{}", kind_prefix(id.kind), id.index); }

std::uint32_t SsaProgram::value_count() const {
  std::uint32_t n = 0;
  for (const auto &h : hyperparams) n = std::max(n, h.id.index + 1);
  for (auto in : inputs) n = std::max(n, in.index + 1);
  for (const auto &ins : body) n = std::max(n, ins.dest.index + 1);
  return n;
}

std::vector<double> SsaProgram::initial_hyper_values() const {
  std::vector<double> out;
  out.reserve(hyperparams.size());
  for (const auto &h : hyperparams) out.push_back(h.init);
  return out;
}

std::vector<bool> SsaProgram::adaptive_mask() const {
  std::vector<bool> out;
  for (const auto &h : hyperparams) out.push_back(!h.fixed);
  return out;
}

void SsaProgram::validate(std::size_t max_len) const {
  // Definition order is hyperparams, inputs, body; indices strictly increase.
  std::vector<signed char> defined;  // -1 undefined, else Kind
  std::int64_t last = -1;
  auto define = [&](ValueId id, const auto &where) {
    if (static_cast<std::int64_t>(id.index) <= last)
      throw ProgramError(where() + ": " + to_string(id) + " is out of definition order or redefined");
    last = id.index;
    if (defined.size() <= id.index) defined.resize(id.index + 1, -1);
    defined[id.index] = static_cast<signed char>(id.kind);
  };
  auto use = [&](ValueId id, const auto &where) {
    if (id.index >= defined.size() || defined[id.index] < 0)
      throw ProgramError(where() + ": " + to_string(id) + " used before definition");
    if (defined[id.index] != static_cast<signed char>(id.kind))
      throw ProgramError(where() + ": " + to_string(id) + " has the wrong kind");
  };
  defined.reserve(value_count());

  for (const auto &h : hyperparams) {
    if (h.id.kind != Kind::scalar) throw ProgramError("hyperparameter " + to_string(h.id) + " is not a scalar");
    define(h.id, [] { return std::string("param"); });
  }
  for (auto in : inputs) {
    if (in.kind != Kind::vector) throw ProgramError("input " + to_string(in) + " is not a vector");
    define(in, [] { return std::string("input"); });
  }
  if (body.empty()) throw ProgramError("program has no instructions");
  if (body.size() > max_len)
    throw ProgramError(fmt::format("program length {} exceeds max_len {}", body.size(), max_len));
  for (const auto &ins : body) {
    auto where = [&] { return describe(ins); };
    for (auto a : ins.operands()) use(a, where);
    check_signature<ValueId>(ins.op, ins.dest, ins.operands(), where);
    define(ins.dest, where);
  }
  if (return_id.kind != Kind::vector) throw ProgramError("return value " + to_string(return_id) + " is not a vector");
  if (return_id != body.back().dest)
    throw ProgramError("return value " + to_string(return_id) + " is not the last instruction's result");
}

std::vector<double> TacProgram::initial_hyper_values() const {
  std::vector<double> out;
  for (const auto &h : hyperparams) out.push_back(h.init);
  return out;
}

std::vector<bool> TacProgram::adaptive_mask() const {
  std::vector<bool> out;
  for (const auto &h : hyperparams) out.push_back(!h.fixed);
  return out;
}

void TacProgram::validate() const {
  auto in_pool = [&](Slot s) {
    return s.index < (s.kind == Kind::scalar ? n_scalar_slots : n_vector_slots);
  };
  auto slot_name = [](Slot s) { return fmt::format("{}{}", kind_prefix(s.kind), s.index); };
  for (const auto &h : hyperparams) {
    if (h.slot.kind != Kind::scalar || !in_pool(h.slot))
      throw ProgramError("hyperparameter slot " + slot_name(h.slot) + " is invalid");
  }
  for (auto in : inputs) {
    if (in.kind != Kind::vector || !in_pool(in)) throw ProgramError("input slot " + slot_name(in) + " is invalid");
  }
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto &ins = body[i];
    auto where = [i] { return fmt::format("instruction {}", i + 1); };
    if (!in_pool(ins.dest)) throw ProgramError(where() + ": destination slot out of range");
    for (auto a : ins.operands())
      if (!in_pool(a)) throw ProgramError(where() + ": operand slot out of range");
    check_signature<Slot>(ins.op, ins.dest, ins.operands(), where);
  }
  if (return_slot.kind != Kind::vector || !in_pool(return_slot))
    throw ProgramError("return slot " + slot_name(return_slot) + " is invalid");
  if (!origin.empty() && origin.size() != body.size())
    throw ProgramError("origin table does not match body length");
}

}
