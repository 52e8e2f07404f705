#pragma once

#include <optional>

#include "mpm/particles.hpp"
#include "mpm/secant.hpp"

namespace mpm {

struct Diagnostics {
  double total_mass = 0.0;
  Vec2 momentum = Vec2::Zero();
  double kinetic_energy = 0.0;
  double elastic_energy = 0.0;        // sum V0 psi(F)
  double gravitational_energy = 0.0;  // -sum m g . x
  std::optional<MacroStepReport> macro;

  double total_energy() const {
    return kinetic_energy + elastic_energy + gravitational_energy;
  }
};

Diagnostics compute_diagnostics(const SimState& state);

}  // namespace mpm
