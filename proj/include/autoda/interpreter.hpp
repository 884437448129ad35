#ifndef AUTODA_INTERPRETER_HPP
#define AUTODA_INTERPRETER_HPP

#include "autoda/dsl.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace autoda {

using Vector = std::vector<double>;

// Kernels shared by the SSA and TAC interpreters. Reductions accumulate left
// to right so both execution forms round identically. Element-wise kernels
// tolerate `r` aliasing an operand.
namespace kernel {

inline double scalar(OpCode op, double a, double b) {
  switch (op) {
    case OpCode::add_ss: return a + b;
    case OpCode::sub_ss: return a - b;
    case OpCode::mul_ss: return a * b;
    case OpCode::div_ss: return a / b;
    default: return 0.0;
  }
}

inline void vv(OpCode op, const double *a, const double *b, double *r, std::size_t dim) {
  if (op == OpCode::add_vv) {
    for (std::size_t i = 0; i < dim; ++i) r[i] = a[i] + b[i];
  } else {
    for (std::size_t i = 0; i < dim; ++i) r[i] = a[i] - b[i];
  }
}

inline void vs(OpCode op, const double *a, double b, double *r, std::size_t dim) {
  if (op == OpCode::mul_vs) {
    for (std::size_t i = 0; i < dim; ++i) r[i] = a[i] * b;
  } else {
    for (std::size_t i = 0; i < dim; ++i) r[i] = a[i] / b;
  }
}

inline double dot(const double *a, const double *b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const double *a, std::size_t dim) { return std::sqrt(dot(a, a, dim)); }

}

/// ‖a − b‖₂ with the same accumulation order as NORM.V.
inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

using Value = std::variant<double, Vector>;

/// Applies one operation to explicit operand values. Throws ProgramError on a
/// kind or dimension mismatch.
Value eval_op(OpCode op, std::span<const Value> operands);

/// Reusable scratch storage for running SSA programs of one dimension.
class SsaMachine {
 public:
  explicit SsaMachine(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  /// Result view stays valid until the next call.
  std::span<const double> run(const SsaProgram &p, std::span<const double> hyper,
                              std::span<const double> x0, std::span<const double> x,
                              std::span<const double> n);

 private:
  std::size_t dim_;
  std::vector<double> scalars_;
  std::vector<double> vectors_;
};

class TacMachine {
 public:
  explicit TacMachine(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }

  std::span<const double> run(const TacProgram &p, std::span<const double> hyper,
                              std::span<const double> x0, std::span<const double> x,
                              std::span<const double> n);

 private:
  std::size_t dim_;
  std::vector<double> scalars_;
  std::vector<double> vectors_;
};

Vector run_ssa(const SsaProgram &p, std::span<const double> hyper, std::span<const double> x0,
               std::span<const double> x, std::span<const double> n);

Vector run_tac(const TacProgram &p, std::span<const double> hyper, std::span<const double> x0,
               std::span<const double> x, std::span<const double> n);

}

#endif //AUTODA_INTERPRETER_HPP
