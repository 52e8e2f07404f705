#pragma once

#include <cstddef>
#include <optional>

#include "mpm/types.hpp"

namespace mpm {

/// Isotropic elastic material. Lamé parameters are derived from (E, nu).
struct Material {
  double E = 1.0e4;
  double nu = 0.3;
  double rho = 1000.0;  // kg/m^2 (areal density in 2D)

  static Material from_young_poisson(double E, double nu, double rho);

  double mu() const { return E / (2.0 * (1.0 + nu)); }
  double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  /// Dilatational wave speed sqrt((lambda + 2 mu) / rho).
  double wave_speed() const;

  /// Throws ContractViolation unless E > 0, 0 <= nu < 0.5 and rho > 0.
  void validate() const;
};

/// F = U diag(sigma) V^T with U, V proper rotations. sigma is sorted
/// descending; for det(F) < 0 the sign sits on sigma[1].
struct Svd2 {
  Mat2 U;
  Vec2 sigma;
  Mat2 V;
};

Svd2 svd2x2(const Mat2& F);

/// Closest rotation to F (U V^T from svd2x2).
Mat2 rotation_part(const Mat2& F);

/// Smallest admissible det(F) for stress and energy evaluation.
inline constexpr double kMinDeterminant = 1e-10;

/// Fixed corotated energy density mu * sum (sigma_i - 1)^2 + lambda/2 (J - 1)^2.
double elastic_energy_density(const Mat2& F, const Material& mat,
                              std::optional<std::size_t> particle = std::nullopt);

/// First Piola-Kirchhoff stress 2 mu (F - R) + lambda (J - 1) J F^-T.
Mat2 pk1_fixed_corotated(const Mat2& F, const Material& mat,
                         std::optional<std::size_t> particle = std::nullopt);

}  // namespace mpm
