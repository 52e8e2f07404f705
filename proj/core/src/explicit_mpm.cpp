#include "mpm/explicit_mpm.hpp"

#include <algorithm>
#include <cmath>

#include "mpm/errors.hpp"
#include "mpm/materials.hpp"

namespace mpm {

double SimState::total_mass() const {
  double m = 0.0;
  for (const Particle& p : particles) m += p.m;
  return m;
}

Grid p2g(const SimState& state, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("p2g: dt must be positive");
  Grid grid(state.spec);
  const double inv_d = 1.0 / state.spec.apic_inertia();
  for (std::size_t p = 0; p < state.particles.size(); ++p) {
    const Particle& part = state.particles[p];
    const Stencil s = stencil(part.x, state.spec, p);
    const Mat2 stress = pk1_fixed_corotated(part.F, state.mat, p);
    // Fused MLS force and APIC affine term.
    const Mat2 affine = part.m * part.C - dt * inv_d * part.V0 * stress * part.F.transpose();
    const Vec2 mv = part.m * part.v;
    s.for_each(state.spec, [&](std::size_t k, double w, const Vec2&, const Vec2& dpos) {
      grid.mass[k] += w * part.m;
      grid.momentum[k] += w * (mv + affine * dpos);
    });
  }
  grid.mark_active(state.total_mass());
  return grid;
}

void grid_update(Grid& grid, double dt, const Vec2& gravity) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.active[k]) {
      grid.velocity[k] = grid.momentum[k] / grid.mass[k] + dt * gravity;
    } else {
      grid.velocity[k].setZero();
    }
  }
  apply_boundary(grid);
}

void g2p(SimState& state, const Grid& grid, double dt) {
  const double inv_d = 1.0 / state.spec.apic_inertia();
  for (std::size_t p = 0; p < state.particles.size(); ++p) {
    Particle& part = state.particles[p];
    const Stencil s = stencil(part.x, state.spec, p);
    Vec2 v = Vec2::Zero();
    Mat2 B = Mat2::Zero();
    s.for_each(state.spec, [&](std::size_t k, double w, const Vec2&, const Vec2& dpos) {
      const Vec2 wv = w * grid.velocity[k];
      v += wv;
      B += wv * dpos.transpose();
    });
    part.v = v;
    part.C = inv_d * B;
    part.F = (Mat2::Identity() + dt * part.C) * part.F;
    part.x += dt * part.v;
    if (!state.spec.in_interior(part.x)) {
      throw OutOfDomainError(p, "advected outside the valid grid interior");
    }
  }
}

double stable_dt(const SimState& state, double cfl) {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ContractViolation("stable_dt: cfl must lie in (0, 1]");
  double v_max = 0.0;
  for (const Particle& p : state.particles) v_max = std::max(v_max, p.v.norm());
  return cfl * state.spec.dx / (state.mat.wave_speed() + v_max);
}

void substep(SimState& state, double dt) {
  Grid grid = p2g(state, dt);
  grid_update(grid, dt, state.gravity);
  g2p(state, grid, dt);
  state.time += dt;
}

}  // namespace mpm
