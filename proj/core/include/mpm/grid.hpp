#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mpm/types.hpp"

namespace mpm {

enum class WallCondition { kSticky, kSlip };

/// Boundary condition for each of the four domain walls.
struct WallConditions {
  WallCondition left = WallCondition::kSticky;
  WallCondition right = WallCondition::kSticky;
  WallCondition bottom = WallCondition::kSticky;
  WallCondition top = WallCondition::kSticky;
};

/// Uniform 2D background grid layout. Node (i, j) sits at origin + dx * (i, j).
struct GridSpec {
  double dx = 1.0 / 64.0;
  int nx = 64;
  int ny = 64;
  Vec2 origin = Vec2::Zero();
  int boundary_band = 2;
  WallConditions walls;

  /// Throws ContractViolation unless dx > 0, nx, ny >= 8 and boundary_band >= 2.
  void validate() const;

  std::size_t node_count() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t node_index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  Vec2 node_position(int i, int j) const {
    return origin + dx * Vec2(static_cast<double>(i), static_cast<double>(j));
  }

  /// APIC inertia scalar D = dx^2 / 4 for quadratic B-splines.
  double apic_inertia() const { return 0.25 * dx * dx; }

  /// Lower-left and upper-right corners of the region particles may occupy.
  Vec2 interior_min() const;
  Vec2 interior_max() const;
  bool in_interior(const Vec2& x) const;
};

/// Dense node storage with an active mask. Velocity is meaningful only where
/// `active` is set.
struct Grid {
  GridSpec spec;
  std::vector<double> mass;
  std::vector<Vec2> momentum;
  std::vector<Vec2> velocity;
  std::vector<std::uint8_t> active;

  Grid() = default;
  explicit Grid(const GridSpec& s);

  std::size_t size() const { return mass.size(); }
  /// Mass threshold below which a node is treated as empty.
  static double mass_epsilon(double total_particle_mass, std::size_t node_count);
  /// Sets `active` from `mass` using mass_epsilon.
  void mark_active(double total_particle_mass);
  std::size_t active_count() const;
};

struct BSpline1d {
  std::array<double, 3> w;
  std::array<double, 3> dw;  // d/d(fx), i.e. per cell width
};

/// Quadratic B-spline weights for a particle at normalized offset `fx` from
/// the leftmost stencil node. Requires fx in [0.5, 1.5).
BSpline1d bspline_weights_1d(double fx);

/// 3x3 interpolation stencil of one particle.
struct Stencil {
  Vec2i base;                          // index of node (0, 0) of the stencil
  std::array<std::array<double, 3>, 3> w;   // w[a][b] for node base + (a, b)
  std::array<std::array<Vec2, 3>, 3> grad;  // exact weight gradients, 1/m
  std::array<std::array<Vec2, 3>, 3> offset;  // x_k - x_p

  template <typename F>
  void for_each(const GridSpec& spec, F&& f) const {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        f(spec.node_index(base.x() + a, base.y() + b), w[a][b], grad[a][b],
          offset[a][b]);
      }
    }
  }
};

/// Builds the stencil of a particle. Throws OutOfDomainError (carrying
/// `particle` when given) if x_p is outside the valid interior.
Stencil stencil(const Vec2& x_p, const GridSpec& spec,
                std::optional<std::size_t> particle = std::nullopt);

/// True if node (i, j) is within boundary_band * dx of a wall (inclusive), so
/// the nodes a particle at the interior limit leans on are all projected.
bool in_boundary_band(const GridSpec& spec, int i, int j);

/// Projects node velocities at the walls: sticky zeroes the velocity, slip
/// zeroes the wall-normal component. Interior nodes are untouched.
void apply_boundary(Grid& grid);

}  // namespace mpm
