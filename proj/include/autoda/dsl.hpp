#ifndef AUTODA_DSL_HPP
#define AUTODA_DSL_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace autoda {

enum class Kind : std::uint8_t { scalar, vector };

inline char kind_prefix(Kind k) { return k == Kind::scalar ? 's' : 'v'; }

/// The ten DSL operations. Suffixes give parameter kinds; VS means a vector
/// first parameter and a scalar second parameter.
enum class OpCode : std::uint8_t {
  add_ss,
  sub_ss,
  mul_ss,
  div_ss,
  add_vv,
  sub_vv,
  mul_vs,
  div_vs,
  dot_vv,
  norm_v,
};

struct OpInfo {
  std::string_view name;      // ADD.SS
  std::string_view mnemonic;  // ADD
  unsigned arity;
  std::array<Kind, 2> params;
  Kind result;
};

inline constexpr std::array<OpCode, 10> all_ops{
    OpCode::add_ss, OpCode::sub_ss, OpCode::mul_ss, OpCode::div_ss, OpCode::add_vv,
    OpCode::sub_vv, OpCode::mul_vs, OpCode::div_vs, OpCode::dot_vv, OpCode::norm_v,
};

inline constexpr std::array<OpCode, 4> vector_result_ops{
    OpCode::add_vv, OpCode::sub_vv, OpCode::mul_vs, OpCode::div_vs,
};

const OpInfo &op_info(OpCode op);

/// Typed opcode for an untyped (`DOT`) or typed (`DOT.VV`) mnemonic given the
/// operand kinds; empty when no signature matches.
std::optional<OpCode> resolve_op(std::string_view mnemonic, std::span<const Kind> operand_kinds);

/// A named SSA value. Indices come from one sequence shared by both kinds.
struct ValueId {
  std::uint32_t index = 0;
  Kind kind = Kind::scalar;

  friend bool operator==(const ValueId &, const ValueId &) = default;
};

std::string to_string(ValueId id);

struct Hyperparam {
  ValueId id;
  double init = 0.0;
  // Held constant by the step-size controller.
  bool fixed = false;

  friend bool operator==(const Hyperparam &, const Hyperparam &) = default;
};

struct SsaInstr {
  ValueId dest;
  OpCode op = OpCode::add_ss;
  std::array<ValueId, 2> args{};

  std::span<const ValueId> operands() const { return {args.data(), op_info(op).arity}; }

  friend bool operator==(const SsaInstr &a, const SsaInstr &b) {
    if (a.dest != b.dest || a.op != b.op) return false;
    auto x = a.operands(), y = b.operands();
    return std::equal(x.begin(), x.end(), y.begin());
  }
};

enum class InputRole : std::uint8_t { x0 = 0, x = 1, noise = 2 };

/// Straight-line SSA program for the generate() step of the random walk.
/// Inputs are always (x0, x, n) in that order.
struct SsaProgram {
  std::vector<Hyperparam> hyperparams;
  std::array<ValueId, 3> inputs{};
  std::vector<SsaInstr> body;
  ValueId return_id;

  /// One past the largest value index.
  std::uint32_t value_count() const;

  std::vector<double> initial_hyper_values() const;
  std::vector<bool> adaptive_mask() const;

  /// Throws ProgramError on any violated invariant.
  void validate(std::size_t max_len = std::numeric_limits<std::size_t>::max()) const;

  friend bool operator==(const SsaProgram &, const SsaProgram &) = default;
};

/// A storage slot in a TAC program. Scalar and vector slots are separate pools.
struct Slot {
  std::uint32_t index = 0;
  Kind kind = Kind::scalar;

  friend bool operator==(const Slot &, const Slot &) = default;
};

struct TacInstr {
  Slot dest;
  OpCode op = OpCode::add_ss;
  std::array<Slot, 2> args{};

  std::span<const Slot> operands() const { return {args.data(), op_info(op).arity}; }

  friend bool operator==(const TacInstr &a, const TacInstr &b) {
    if (a.dest != b.dest || a.op != b.op) return false;
    auto x = a.operands(), y = b.operands();
    return std::equal(x.begin(), x.end(), y.begin());
  }
};

struct TacParam {
  Slot slot;
  double init = 0.0;
  bool fixed = false;

  friend bool operator==(const TacParam &, const TacParam &) = default;
};

/// Slot-addressed three-address code; slots may be reassigned.
struct TacProgram {
  std::uint32_t n_scalar_slots = 0;
  std::uint32_t n_vector_slots = 0;
  std::vector<TacParam> hyperparams;
  std::array<Slot, 3> inputs{};
  std::vector<TacInstr> body;
  Slot return_slot;
  // SSA value computed by each body instruction; empty for hand-written TAC.
  std::vector<ValueId> origin;

  std::vector<double> initial_hyper_values() const;
  std::vector<bool> adaptive_mask() const;

  void validate() const;

  friend bool operator==(const TacProgram &a, const TacProgram &b) {
    return a.n_scalar_slots == b.n_scalar_slots && a.n_vector_slots == b.n_vector_slots &&
           a.hyperparams == b.hyperparams && a.inputs == b.inputs && a.body == b.body &&
           a.return_slot == b.return_slot;
  }
};

}

#endif //AUTODA_DSL_HPP
