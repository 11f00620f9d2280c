#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace airdraw {

enum class ErrorCode {
  Configuration,
  Ingestion,
  DegenerateGravity,
  IndeterminateAngle,
  Stream,
  UndefinedSavings,
  EmptyInput,
  Alphabet,
  NotTrained,
  Synthesis,
  IncompleteExperiment,
  AmbiguousTraining,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure in the library. The code
/// lets callers (CLI exit codes, service error frames) map failures without
/// string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure that remembers the 1-based input line it came from.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace airdraw
