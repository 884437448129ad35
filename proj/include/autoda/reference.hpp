#ifndef AUTODA_REFERENCE_HPP
#define AUTODA_REFERENCE_HPP

#include "autoda/dsl.hpp"

#include <string>

namespace autoda {

/// Boundary attack proposal written in the DSL (20 instructions).
///
/// s0 is the step toward x0 and is adapted; s1 is the orthogonal step size
/// delta and s2 = sqrt(1 + delta^2), both held fixed. The proposal lies at
/// distance (1 - s0)·‖x - x0‖ from x0.
std::string boundary_program_text(double step = 0.01, double delta = 0.01);
SsaProgram boundary_program(double step = 0.01, double delta = 0.01);

}

#endif //AUTODA_REFERENCE_HPP
