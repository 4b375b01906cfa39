// Error types shared by all modules. Every error carries the name of the
// module that raised it so the CLI can report provenance and pick an exit code.
#pragma once

#include <stdexcept>
#include <string>

namespace pdcf {

enum class ErrorKind { configuration, numerical, physicality, state, contract, io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error("[" + module + "] " + message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

struct ConfigError : Error {
  ConfigError(std::string module, const std::string& message)
      : Error(ErrorKind::configuration, std::move(module), message) {}
};

struct NumericalError : Error {
  NumericalError(std::string module, const std::string& message)
      : Error(ErrorKind::numerical, std::move(module), message) {}
};

// Raised when an assembled covariance matrix violates sigma + (i/2) Omega >= 0.
struct PhysicalityError : Error {
  PhysicalityError(std::string module, const std::string& message, double min_eigenvalue)
      : Error(ErrorKind::physicality, std::move(module), message), min_symplectic_eigenvalue(min_eigenvalue) {}
  double min_symplectic_eigenvalue;
};

struct StateError : Error {
  StateError(std::string module, const std::string& message)
      : Error(ErrorKind::state, std::move(module), message) {}
};

struct ContractViolation : Error {
  ContractViolation(std::string module, const std::string& message)
      : Error(ErrorKind::contract, std::move(module), message) {}
};

struct IoError : Error {
  IoError(std::string module, const std::string& message) : Error(ErrorKind::io, std::move(module), message) {}
};

}  // namespace pdcf
