#include "mpm/diagnostics.hpp"

#include "mpm/materials.hpp"

namespace mpm {

Diagnostics compute_diagnostics(const SimState& state) {
  Diagnostics d;
  for (std::size_t p = 0; p < state.particles.size(); ++p) {
    const Particle& part = state.particles[p];
    d.total_mass += part.m;
    d.momentum += part.m * part.v;
    d.kinetic_energy += 0.5 * part.m * part.v.squaredNorm();
    d.elastic_energy += part.V0 * elastic_energy_density(part.F, state.mat, p);
    d.gravitational_energy -= part.m * state.gravity.dot(part.x);
  }
  return d;
}

}  // namespace mpm
