#pragma once

#include <stdexcept>
#include <string>

namespace hazardsim {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kConvergence = 3,
  kIo = 4,
};

class Error : public std::runtime_error {
 public:
  Error(const std::string& what, ExitCode code) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed input, schema violations, degenerate data.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what, ExitCode::kValidation) {}
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what, ExitCode::kConvergence) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, ExitCode::kIo) {}
};

}  // namespace hazardsim
