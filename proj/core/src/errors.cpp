#include "mpm/errors.hpp"

#include <sstream>

namespace mpm {
namespace {

std::string particle_prefix(std::optional<std::size_t> particle) {
  if (!particle) return "";
  return "particle " + std::to_string(*particle) + ": ";
}

}  // namespace

OutOfDomainError::OutOfDomainError(std::optional<std::size_t> particle,
                                   const std::string& what)
    : Error(particle_prefix(particle) + what), particle_(particle) {}

DegenerateDeformationError::DegenerateDeformationError(
    std::optional<std::size_t> particle, double det)
    : Error([&] {
        std::ostringstream os;
        os << particle_prefix(particle) << "degenerate deformation, det(F) = " << det;
        return os.str();
      }()),
      particle_(particle),
      det_(det) {}

NonConvergenceError::NonConvergenceError(int iterations, double residual)
    : Error([&] {
        std::ostringstream os;
        os << "conjugate gradient did not converge after " << iterations
           << " iterations (relative residual " << residual << ")";
        return os.str();
      }()),
      iterations_(iterations),
      residual_(residual) {}

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : Error(key_path.empty() ? message : key_path + ": " + message),
      key_path_(std::move(key_path)) {}

IoError::IoError(std::string path, const std::string& message)
    : Error(path + ": " + message), path_(std::move(path)) {}

}  // namespace mpm
