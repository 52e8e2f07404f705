#include "mpm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mpm/errors.hpp"

namespace mpm {

void GridSpec::validate() const {
  if (!(dx > 0.0) || !std::isfinite(dx)) {
    throw ContractViolation("grid dx must be positive and finite");
  }
  if (nx < 8 || ny < 8) throw ContractViolation("grid needs at least 8 nodes per axis");
  if (boundary_band < 2) throw ContractViolation("boundary_band must be at least 2");
  if (2 * boundary_band + 2 > std::min(nx, ny)) {
    throw ContractViolation("boundary_band leaves no interior");
  }
}

Vec2 GridSpec::interior_min() const {
  return origin + Vec2::Constant(boundary_band * dx);
}

Vec2 GridSpec::interior_max() const {
  return origin + dx * Vec2(nx - 1 - boundary_band, ny - 1 - boundary_band);
}

bool GridSpec::in_interior(const Vec2& x) const {
  const Vec2 lo = interior_min();
  const Vec2 hi = interior_max();
  return x.x() >= lo.x() && x.y() >= lo.y() && x.x() <= hi.x() && x.y() <= hi.y();
}

Grid::Grid(const GridSpec& s)
    : spec(s),
      mass(s.node_count(), 0.0),
      momentum(s.node_count(), Vec2::Zero()),
      velocity(s.node_count(), Vec2::Zero()),
      active(s.node_count(), 0) {}

double Grid::mass_epsilon(double total_particle_mass, std::size_t node_count) {
  return 1e-12 * total_particle_mass / static_cast<double>(node_count);
}

void Grid::mark_active(double total_particle_mass) {
  const double eps = mass_epsilon(total_particle_mass, size());
  for (std::size_t k = 0; k < size(); ++k) active[k] = mass[k] > eps ? 1 : 0;
}

std::size_t Grid::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
}

BSpline1d bspline_weights_1d(double fx) {
  if (!(fx >= 0.5 && fx < 1.5)) {
    std::ostringstream os;
    os << "bspline_weights_1d: offset " << fx << " outside [0.5, 1.5)";
    throw ContractViolation(os.str());
  }
  const double a = 1.5 - fx;
  const double b = fx - 1.0;
  const double c = fx - 0.5;
  return BSpline1d{{0.5 * a * a, 0.75 - b * b, 0.5 * c * c}, {-a, -2.0 * b, c}};
}

Stencil stencil(const Vec2& x_p, const GridSpec& spec,
                std::optional<std::size_t> particle) {
  if (!x_p.allFinite() || !spec.in_interior(x_p)) {
    std::ostringstream os;
    os << "position (" << x_p.x() << ", " << x_p.y()
       << ") outside the valid grid interior";
    throw OutOfDomainError(particle, os.str());
  }
  const double inv_dx = 1.0 / spec.dx;
  const Vec2 rel = (x_p - spec.origin) * inv_dx;
  Stencil s;
  s.base = Vec2i(static_cast<int>(std::floor(rel.x() - 0.5)),
                 static_cast<int>(std::floor(rel.y() - 0.5)));
  const Vec2 fx = rel - s.base.cast<double>();
  const BSpline1d wx = bspline_weights_1d(fx.x());
  const BSpline1d wy = bspline_weights_1d(fx.y());
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      s.w[a][b] = wx.w[a] * wy.w[b];
      s.grad[a][b] = Vec2(wx.dw[a] * wy.w[b], wx.w[a] * wy.dw[b]) * inv_dx;
      s.offset[a][b] = spec.node_position(s.base.x() + a, s.base.y() + b) - x_p;
    }
  }
  return s;
}

bool in_boundary_band(const GridSpec& spec, int i, int j) {
  const int band = spec.boundary_band;
  return i <= band || j <= band || i >= spec.nx - 1 - band || j >= spec.ny - 1 - band;
}

namespace {

void project(Vec2& v, WallCondition wall, int axis) {
  if (wall == WallCondition::kSticky) {
    v.setZero();
  } else {
    v[axis] = 0.0;
  }
}

}  // namespace

void apply_boundary(Grid& grid) {
  const GridSpec& spec = grid.spec;
  const int band = spec.boundary_band;
  for (int j = 0; j < spec.ny; ++j) {
    for (int i = 0; i < spec.nx; ++i) {
      if (!in_boundary_band(spec, i, j)) continue;
      Vec2& v = grid.velocity[spec.node_index(i, j)];
      if (i <= band) project(v, spec.walls.left, 0);
      if (i >= spec.nx - 1 - band) project(v, spec.walls.right, 0);
      if (j <= band) project(v, spec.walls.bottom, 1);
      if (j >= spec.ny - 1 - band) project(v, spec.walls.top, 1);
    }
  }
}

}  // namespace mpm
