#pragma once

#include <vector>

#include "mpm/grid.hpp"
#include "mpm/materials.hpp"
#include "mpm/types.hpp"

namespace mpm {

struct Particle {
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();
  double m = 0.0;
  double V0 = 0.0;
  Mat2 F = Mat2::Identity();
  Mat2 C = Mat2::Zero();
};

/// Particles plus everything needed to advance them: the grid layout that
/// defines the reference configuration, the material and body force.
struct SimState {
  std::vector<Particle> particles;
  GridSpec spec;
  Material mat;
  Vec2 gravity = Vec2::Zero();
  double time = 0.0;

  double total_mass() const;
};

}  // namespace mpm
