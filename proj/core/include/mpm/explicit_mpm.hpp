#pragma once

#include "mpm/grid.hpp"
#include "mpm/particles.hpp"

namespace mpm {

/// MLS-MPM scatter: node mass and momentum including the fused internal
/// force term -dt * (1/D) * V0 * P(F) F^T (x_k - x_p). Marks active nodes.
Grid p2g(const SimState& state, double dt);

/// v_k = momentum_k / m_k + dt * gravity on active nodes, then wall projection.
void grid_update(Grid& grid, double dt, const Vec2& gravity);

/// APIC gather of v_p and C_p, then F <- (I + dt C) F and x <- x + dt v.
/// Throws OutOfDomainError if a particle leaves the valid interior.
void g2p(SimState& state, const Grid& grid, double dt);

/// cfl * dx / (c + v_max) with c the dilatational wave speed.
double stable_dt(const SimState& state, double cfl);

/// One explicit step p2g -> grid_update -> g2p; advances state.time by dt.
void substep(SimState& state, double dt);

}  // namespace mpm
