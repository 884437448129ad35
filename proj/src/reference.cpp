#include "autoda/reference.hpp"

#include "autoda/program_text.hpp"

#include <fmt/format.h>

#include <cmath>

namespace autoda {

std::string boundary_program_text(double step, double delta) {
  return fmt::format(R"(# Boundary attack proposal step.
param s0 = {}
param s1 = {} fixed
param s2 = {} fixed
input v3
input v4
input v5
v6 = SUB(v3,v4)
s7 = NORM(v6)
v8 = DIV(v6,s7)
# noise orthogonal to the source direction, scaled to delta * d
s9 = DOT(v5,v8)
v10 = MUL(v8,s9)
v11 = SUB(v5,v10)
s12 = MUL(s1,s7)
s13 = NORM(v11)
s14 = DIV(s12,s13)
v15 = MUL(v11,s14)
v16 = SUB(v6,v15)
v17 = DIV(v16,s2)
s18 = NORM(v17)
v19 = SUB(v3,v17)
# step toward x0
s20 = MUL(s0,s7)
s21 = SUB(s18,s7)
s22 = ADD(s20,s21)
s23 = DIV(s22,s18)
v24 = MUL(v17,s23)
v25 = ADD(v19,v24)
return v25
)",
                     format_double(step), format_double(delta), format_double(std::sqrt(1.0 + delta * delta)));
}

SsaProgram boundary_program(double step, double delta) { return parse_program(boundary_program_text(step, delta)); }

}
