#ifndef AUTODA_COMPILER_HPP
#define AUTODA_COMPILER_HPP

#include "autoda/dsl.hpp"

#include <string>

namespace autoda {

/// Lowers `p` to TAC: drops dead instructions, then assigns slots in one
/// forward pass. An operand's slot is released at its last use and a
/// destination takes the lowest free slot of its kind. Hyperparameters and
/// inputs start in slots 0.. and are reusable after their last use.
/// Instruction order is preserved.
TacProgram compile(const SsaProgram &p);

struct SlotCheck {
  bool ok = true;
  std::string message;
};

/// Abstract execution over initialized/uninitialized slot states: fails on
/// any read of a slot that has not been written.
SlotCheck check_slots(const TacProgram &tac);

/// Abstract execution tracking which SSA value each slot holds; fails unless
/// every TAC operand reads exactly the SSA operand it stands for. Requires
/// `tac.origin` (set by compile()).
SlotCheck check_slot_mapping(const SsaProgram &ssa, const TacProgram &tac);

}

#endif //AUTODA_COMPILER_HPP
