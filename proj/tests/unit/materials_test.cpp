#include <cmath>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "mpm/errors.hpp"
#include "mpm/materials.hpp"

using namespace mpm;

namespace {

Mat2 rot(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Mat2 random_f(std::mt19937_64& rng, double min_det) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    Mat2 F = Mat2::Identity();
    F(0, 0) += 0.6 * u(rng);
    F(0, 1) += 0.6 * u(rng);
    F(1, 0) += 0.6 * u(rng);
    F(1, 1) += 0.6 * u(rng);
    if (F.determinant() > min_det) return F;
  }
}

void check_svd(const Mat2& F) {
  const Svd2 s = svd2x2(F);
  const Mat2 rebuilt = s.U * s.sigma.asDiagonal() * s.V.transpose();
  const double scale = std::max(F.norm(), 1e-300);
  CHECK((rebuilt - F).norm() / scale < 1e-12);
  CHECK(s.U.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.V.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((s.U.transpose() * s.U - Mat2::Identity()).norm() < 1e-12);
  CHECK((s.V.transpose() * s.V - Mat2::Identity()).norm() < 1e-12);
  CHECK(s.sigma[0] >= s.sigma[1]);
  CHECK(s.sigma[0] >= std::abs(s.sigma[1]) - 1e-12 * scale);
}

}  // namespace

TEST_CASE("material Lame parameters") {
  const Material m{1.0e4, 0.3, 1000.0};
  CHECK(m.mu() == doctest::Approx(1.0e4 / 2.6));
  CHECK(m.lambda() == doctest::Approx(1.0e4 * 0.3 / (1.3 * 0.4)));
  CHECK_NOTHROW(m.validate());
  CHECK_THROWS_AS((Material{-1.0, 0.3, 1.0}).validate(), ContractViolation);
  CHECK_THROWS_AS((Material{1.0, 0.5, 1.0}).validate(), ContractViolation);
  CHECK_THROWS_AS((Material{1.0, -0.1, 1.0}).validate(), ContractViolation);
  CHECK_THROWS_AS((Material{1.0, 0.2, 0.0}).validate(), ContractViolation);
}

TEST_CASE("svd of identity and rotations") {
  const Svd2 id = svd2x2(Mat2::Identity());
  CHECK((id.U - Mat2::Identity()).norm() < 1e-15);
  CHECK((id.V - Mat2::Identity()).norm() < 1e-15);
  CHECK((id.sigma - Vec2(1.0, 1.0)).norm() < 1e-15);

  for (double theta : {0.3, -1.2, 2.9, 3.14159}) {
    const Svd2 s = svd2x2(rot(theta));
    CHECK((s.sigma - Vec2(1.0, 1.0)).norm() < 1e-12);
    CHECK((s.U * s.V.transpose() - rot(theta)).norm() < 1e-12);
  }
}

TEST_CASE("svd reconstruction on random, near-singular and inverted inputs") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Mat2 F;
    F << n(rng), n(rng), n(rng), n(rng);
    check_svd(F);
  }
  for (int i = 0; i < 200; ++i) {
    Mat2 F;
    const Vec2 a(n(rng), n(rng));
    F.col(0) = a;
    F.col(1) = (1.0 + 1e-9 * n(rng)) * a;
    check_svd(F);
  }
  Mat2 inverted;
  inverted << 1.0, 0.0, 0.0, -0.5;
  const Svd2 s = svd2x2(inverted);
  check_svd(inverted);
  CHECK(s.sigma[1] < 0.0);
  CHECK(s.sigma[0] == doctest::Approx(1.0));
  CHECK(s.sigma[1] == doctest::Approx(-0.5));

  Mat2 diag;
  diag << 0.5, 0.0, 0.0, 2.0;
  check_svd(diag);
  check_svd(Mat2::Zero());
}

TEST_CASE("svd rejects non-finite input") {
  Mat2 F = Mat2::Identity();
  F(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(svd2x2(F), ContractViolation);
  F(0, 1) = std::nan("");
  CHECK_THROWS_AS(svd2x2(F), ContractViolation);
}

TEST_CASE("energy density hand value") {
  // E = 2.5, nu = 0.25 gives mu = lambda = 1; psi = 0.1^2 + 0.5 * 0.1^2.
  const Material unit{2.5, 0.25, 1.0};
  CHECK(unit.mu() == doctest::Approx(1.0));
  CHECK(unit.lambda() == doctest::Approx(1.0));
  Mat2 F;
  F << 1.1, 0.0, 0.0, 1.0;
  CHECK(elastic_energy_density(F, unit) == doctest::Approx(0.015).epsilon(1e-12));
}

TEST_CASE("stress and energy vanish at rest and under rotation") {
  const Material m{1.0e4, 0.3, 1000.0};
  CHECK(elastic_energy_density(Mat2::Identity(), m) == 0.0);
  CHECK(pk1_fixed_corotated(Mat2::Identity(), m).norm() == 0.0);
  for (double theta : {0.1, 1.0, -2.5}) {
    CHECK(std::abs(elastic_energy_density(rot(theta), m)) < 1e-9);
    CHECK(pk1_fixed_corotated(rot(theta), m).norm() < 1e-9);
  }
}

TEST_CASE("energy is rotation invariant") {
  const Material m{1.0e4, 0.3, 1000.0};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> angle(-3.1, 3.1);
  for (int i = 0; i < 200; ++i) {
    const Mat2 F = random_f(rng, 0.1);
    const double psi = elastic_energy_density(F, m);
    const double rotated = elastic_energy_density(rot(angle(rng)) * F, m);
    CHECK(std::abs(rotated - psi) <= 1e-12 * std::max(1.0, psi));
    CHECK(psi >= 0.0);
  }
}

TEST_CASE("PK1 stress matches finite differences of the energy") {
  const Material m{1.0e4, 0.3, 1000.0};
  std::mt19937_64 rng(7);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Mat2 F = random_f(rng, 0.1);
    const Mat2 P = pk1_fixed_corotated(F, m);
    Mat2 fd;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        Mat2 Fp = F, Fm = F;
        Fp(r, c) += h;
        Fm(r, c) -= h;
        fd(r, c) = (elastic_energy_density(Fp, m) - elastic_energy_density(Fm, m)) / (2 * h);
      }
    }
    CHECK((P - fd).norm() <= 1e-5 * std::max(P.norm(), 1.0));
  }
}

TEST_CASE("degenerate deformation is rejected with the particle id") {
  const Material m;
  Mat2 F;
  F << 1.0, 0.0, 0.0, 1e-11;
  CHECK_THROWS_AS(elastic_energy_density(F, m), DegenerateDeformationError);
  try {
    Mat2 inverted;
    inverted << -0.5, 0.0, 0.0, 0.5;
    pk1_fixed_corotated(inverted, m, 9);
    FAIL("expected DegenerateDeformationError");
  } catch (const DegenerateDeformationError& e) {
    CHECK(e.particle() == std::optional<std::size_t>(9));
    CHECK(e.determinant() == doctest::Approx(-0.25));
  }
}
