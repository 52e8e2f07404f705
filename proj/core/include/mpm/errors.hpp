#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mpm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (e.g. kernel offset out of range).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A particle left the valid interior of the grid.
class OutOfDomainError : public Error {
 public:
  OutOfDomainError(std::optional<std::size_t> particle, const std::string& what);
  std::optional<std::size_t> particle() const { return particle_; }

 private:
  std::optional<std::size_t> particle_;
};

/// det(F) fell below the degeneracy guard.
class DegenerateDeformationError : public Error {
 public:
  DegenerateDeformationError(std::optional<std::size_t> particle, double det);
  std::optional<std::size_t> particle() const { return particle_; }
  double determinant() const { return det_; }

 private:
  std::optional<std::size_t> particle_;
  double det_;
};

/// The least-squares system has no active nodes.
class EmptySystemError : public Error {
 public:
  using Error::Error;
};

/// Conjugate gradient hit its iteration cap.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(int iterations, double residual);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

/// Substep size exceeds the CFL bound and the policy is `error`.
class CflViolationError : public Error {
 public:
  using Error::Error;
};

/// Scene parsing/validation failure. `key_path` locates the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

/// Filesystem failure while writing or reading run output.
class IoError : public Error {
 public:
  IoError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace mpm
