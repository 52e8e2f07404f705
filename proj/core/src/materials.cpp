#include "mpm/materials.hpp"

#include <cmath>
#include <utility>

#include <Eigen/LU>

#include "mpm/errors.hpp"

namespace mpm {

Material Material::from_young_poisson(double E, double nu, double rho) {
  Material m{E, nu, rho};
  m.validate();
  return m;
}

double Material::wave_speed() const { return std::sqrt((lambda() + 2.0 * mu()) / rho); }

void Material::validate() const {
  if (!(E > 0.0) || !std::isfinite(E)) throw ContractViolation("material E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw ContractViolation("material nu must lie in [0, 0.5)");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw ContractViolation("material rho must be positive");
}

namespace {

Mat2 rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

}  // namespace

// Polar decomposition F = R S with R the rotation maximizing tr(R^T F), then
// S = V diag(sigma) V^T by a single Jacobi rotation. U = R V.
Svd2 svd2x2(const Mat2& F) {
  if (!F.allFinite()) throw ContractViolation("svd2x2: non-finite input");

  const double theta = std::atan2(F(1, 0) - F(0, 1), F(0, 0) + F(1, 1));
  const Mat2 R = rotation(theta);
  Mat2 S = R.transpose() * F;
  const double s01 = 0.5 * (S(0, 1) + S(1, 0));

  // The first column of V is the eigenvector of the larger eigenvalue.
  const double phi = 0.5 * std::atan2(2.0 * s01, S(0, 0) - S(1, 1));
  const Mat2 V = rotation(phi);
  const double c = V(0, 0);
  const double s = V(1, 0);
  const double cc = c * c, ss = s * s, cs2 = 2.0 * c * s * s01;

  Svd2 out;
  out.sigma = Vec2(cc * S(0, 0) + cs2 + ss * S(1, 1), ss * S(0, 0) - cs2 + cc * S(1, 1));
  out.V = V;
  out.U = R * V;
  return out;
}

Mat2 rotation_part(const Mat2& F) {
  const Svd2 svd = svd2x2(F);
  return svd.U * svd.V.transpose();
}

namespace {

double checked_det(const Mat2& F, std::optional<std::size_t> particle) {
  const double J = F.determinant();
  if (!(J > kMinDeterminant)) throw DegenerateDeformationError(particle, J);
  return J;
}

}  // namespace

double elastic_energy_density(const Mat2& F, const Material& mat,
                              std::optional<std::size_t> particle) {
  const double J = checked_det(F, particle);
  const Vec2 sigma = svd2x2(F).sigma;
  const double mu = mat.mu();
  const double lambda = mat.lambda();
  return mu * (sigma.array() - 1.0).square().sum() + 0.5 * lambda * (J - 1.0) * (J - 1.0);
}

Mat2 pk1_fixed_corotated(const Mat2& F, const Material& mat,
                         std::optional<std::size_t> particle) {
  const double J = checked_det(F, particle);
  const Mat2 R = rotation_part(F);
  // J F^-T is the cofactor matrix of F.
  Mat2 cof;
  cof << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  return 2.0 * mat.mu() * (F - R) + mat.lambda() * (J - 1.0) * cof;
}

}  // namespace mpm
