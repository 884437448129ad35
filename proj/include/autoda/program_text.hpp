#ifndef AUTODA_PROGRAM_TEXT_HPP
#define AUTODA_PROGRAM_TEXT_HPP

#include "autoda/dsl.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace autoda {

// Line-oriented program text:
//
//   # comment
//   param s0 = 0.01          (optionally followed by `fixed`)
//   input v1                 three times: x0, x, n
//   v4 = SUB(v1,v2)          typed (SUB.VV) or untyped mnemonics
//   return v4
//
// In SSA text every id is defined once, in increasing index order. In TAC
// text ids name slots and may be reassigned.

SsaProgram parse_program(std::string_view text);
std::string format_program(const SsaProgram &p);

TacProgram parse_tac(std::string_view text);
std::string format_tac(const TacProgram &p);

/// Programs separated by lines consisting of `---`.
std::vector<SsaProgram> parse_programs(std::string_view text);
std::string format_programs(const std::vector<SsaProgram> &programs);

/// 17 significant digits; parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::string &path);
void write_file(const std::string &path, std::string_view contents);

}

#endif //AUTODA_PROGRAM_TEXT_HPP
