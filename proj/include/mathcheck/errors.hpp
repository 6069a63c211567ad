#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mathcheck {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by every text parser in the project. Positions are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, std::string message,
              std::vector<std::string> expected = {});

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
  std::vector<std::string> expected_;
};

struct ArityError : Error { using Error::Error; };
struct CaptureError : Error { using Error::Error; };
struct ReferenceError : Error { using Error::Error; };
struct NestingError : Error { using Error::Error; };
struct StructureError : Error { using Error::Error; };

// Exact evaluation failures.
struct EvalError : Error { using Error::Error; };
struct DivisionByZero : EvalError {
  DivisionByZero(std::string subterm)
      : EvalError("division by zero in " + subterm), subterm(std::move(subterm)) {}
  std::string subterm;
};
struct UnboundVariable : EvalError {
  explicit UnboundVariable(std::string name)
      : EvalError("unbound variable " + name), name(std::move(name)) {}
  std::string name;
};
struct NonIntegerExponent : EvalError { using EvalError::EvalError; };
// The evaluator met a construct it cannot decide exactly (quantifier, undefined function, ...).
struct NotEvaluable : EvalError { using EvalError::EvalError; };

struct UnsupportedTerm : Error { using Error::Error; };
struct DegreeTooHigh : Error { using Error::Error; };
struct NotUnivariate : Error { using Error::Error; };

struct SortClash : Error { using Error::Error; };
struct UnsupportedFeature : Error { using Error::Error; };

struct PromptError : Error { using Error::Error; };
struct UnknownTemplate : Error { using Error::Error; };
struct TransportError : Error { using Error::Error; };
class FormalizationFailed : public Error {
 public:
  explicit FormalizationFailed(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<std::string> diagnostics_;
};

}  // namespace mathcheck
