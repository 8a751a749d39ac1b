#ifndef CONCEPTFUSE_ERRORS_HPP
#define CONCEPTFUSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cfuse {

// Base for all engine errors. CLI maps these to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric argument or field is outside its allowed range.
struct DomainError : Error {
  using Error::Error;
};

// Malformed input file; message carries the 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

// Structurally valid input that violates a data contract (duplicate ids, ...).
struct DataError : Error {
  using Error::Error;
};

// Infeasible generator settings.
struct SpecError : Error {
  using Error::Error;
};

// Output rows violate a writer precondition; raised before anything is written.
struct ContractError : Error {
  using Error::Error;
};

// Model and index built from different corpora.
struct ConsistencyError : Error {
  using Error::Error;
};

// No evaluable queries / no usable feedback at the chosen recall level.
struct EvaluationError : Error {
  using Error::Error;
};

}  // namespace cfuse

#endif
