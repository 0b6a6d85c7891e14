#pragma once
#include <stdexcept>
#include <string>

namespace ponderolens {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int { ok = 0, config = 2, mismatch = 3, optimization = 4, io = 5 };

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ExitCode::config, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ExitCode::config, w) {}
};
/// Incompatible grids or energy samples between stages.
struct MismatchError : Error {
  explicit MismatchError(const std::string& w) : Error(ExitCode::mismatch, w) {}
};
struct OptimizationError : Error {
  explicit OptimizationError(const std::string& w) : Error(ExitCode::optimization, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ExitCode::io, w) {}
};

}  // namespace ponderolens
