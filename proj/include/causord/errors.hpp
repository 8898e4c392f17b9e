#pragma once

#include <stdexcept>
#include <string>

namespace causord {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Input text could not be parsed (scenario/model files, propositions).
// Carries a line number (1-based, 0 = unknown) for diagnostics.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    std::string s = "line " + std::to_string(line);
    if (column > 0) s += ":" + std::to_string(column);
    return s + ": " + what;
  }
  int line_ = 0;
  int column_ = 0;
};

// Well-formed input that violates a semantic contract.
class SemanticError : public Error {
 public:
  using Error::Error;
};

class CycleError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class DuplicatePartyError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class DuplicateNameError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class UnknownContextError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class UnknownAtomError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class UnknownPartyError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class EmptyFamilyError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class SizeError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class NonTotalOrderError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class MissingContextError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class NormalizationError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class MonotonicityError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class InadmissibleSeedError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class CapExceededError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class ToleranceError : public Error {
 public:
  using Error::Error;
};

class NumericalRankError : public Error {
 public:
  using Error::Error;
};

class BinMismatchError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

class KernelNormalizationError : public SemanticError {
 public:
  using SemanticError::SemanticError;
};

}  // namespace causord
