#pragma once

#include <stdexcept>
#include <string>

namespace sludec {

// Shape disagreement between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the operation's domain (empty input, bad index, bad rate).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Operation invoked in the wrong lifecycle state, e.g. backward before forward.
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

// Non-finite values reached an optimizer step or a model head.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line(line) {}
  std::size_t line;
};

// Structurally valid input that violates a file-format contract.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Corpus import failures (missing files, malformed records).
struct ImportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown configuration keys or invalid values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Artifacts produced under different ontologies or configurations.
struct IncompatibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sludec
