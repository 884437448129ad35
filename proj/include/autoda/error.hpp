#ifndef AUTODA_ERROR_HPP
#define AUTODA_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace autoda {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural problems with a program: kind mismatch, use before def, ...
struct ProgramError : Error {
  using Error::Error;
};

struct ParseError : ProgramError {
  ParseError(std::size_t line, const std::string &what)
      : ProgramError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct OracleError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Settings validation.
inline void check(bool cond, const char *what) {
  if (!cond) throw ConfigError(what);
}

}

#endif //AUTODA_ERROR_HPP
