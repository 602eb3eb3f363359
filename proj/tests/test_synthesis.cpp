#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "ballbot/integrators.hpp"
#include "ballbot/params.hpp"
#include "ballbot/synthesis.hpp"

using namespace ballbot;

namespace {
const PhysicalParams kParams = preset::paper2024();

Eigen::MatrixXd scalarM(double v) {
  Eigen::MatrixXd m(1, 1);
  m << v;
  return m;
}

// Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner:
// an eigenvalue oracle independent of the QR-based solver.
std::vector<std::complex<double>> char_poly_roots(const Eigen::Matrix4d& A) {
  // p(x) = x^4 + c3 x^3 + c2 x^2 + c1 x + c0
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  double c[4];
  Eigen::Matrix4d AM = A;
  c[3] = -AM.trace();
  M = AM + c[3] * Eigen::Matrix4d::Identity();
  AM = A * M;
  c[2] = -AM.trace() / 2.0;
  M = AM + c[2] * Eigen::Matrix4d::Identity();
  AM = A * M;
  c[1] = -AM.trace() / 3.0;
  M = AM + c[1] * Eigen::Matrix4d::Identity();
  AM = A * M;
  c[0] = -AM.trace() / 4.0;

  std::vector<std::complex<double>> r{{0.4, 0.9}, {-0.5, 0.3},
                                      {0.1, -0.8}, {-0.9, -0.2}};
  auto poly = [&](std::complex<double> x) {
    return (((x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
  };
  for (int it = 0; it < 500; ++it) {
    double moved = 0.0;
    for (int i = 0; i < 4; ++i) {
      std::complex<double> denom(1.0, 0.0);
      for (int j = 0; j < 4; ++j)
        if (j != i) denom *= r[i] - r[j];
      const std::complex<double> d = poly(r[i]) / denom;
      r[i] -= d;
      moved = std::max(moved, std::abs(d));
    }
    if (moved < 1e-14) break;
  }
  return r;
}
}  // namespace

TEST_CASE("origin linearization equals the lpv evaluation") {
  const LinearModel lm = linearize_at_origin(kParams);
  const LpvMatrices m = lpv_matrices({0.0, 0.0}, kParams);
  CHECK(lm.A0 == m.A);
  CHECK(lm.B0 == m.B);
  CHECK(lm.A0(2, 0) == 0.0);
  CHECK(lm.A0(3, 0) == 0.0);
  CHECK(lm.A0(2, 3) == 0.0);
  CHECK(lm.A0(3, 3) == 0.0);
  CHECK(lm.A0(2, 1) == doctest::Approx(-342.60).epsilon(1e-3));
}

TEST_CASE("scalar dare closed form") {
  const LqrSolution s =
      solve_dare(scalarM(0.5), scalarM(1.0), scalarM(1.0), scalarM(1.0));
  CHECK(s.P(0, 0) == doctest::Approx(1.13278).epsilon(1e-5));
  CHECK(s.K(0, 0) == doctest::Approx(0.26557).epsilon(1e-4));
}

TEST_CASE("deadbeat plant: A = 0 gives P = Q, K = 0") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd B(3, 1);
  B << 1, 0.5, -1;
  Eigen::MatrixXd Q = Eigen::Vector3d(2.0, 1.0, 0.5).asDiagonal();
  const LqrSolution s = solve_dare(A, B, Q, scalarM(1.0));
  CHECK((s.P - Q).norm() <= 1e-9);
  CHECK(s.K.norm() <= 1e-9);
}

TEST_CASE("ballbot dare") {
  const LinearModel lm = linearize_at_origin(kParams);
  const LtvStep d = discretize_ltv({lm.A0, lm.B0}, 0.05);
  const Eigen::Matrix4d Q = Eigen::Vector4d(200, 1, 0.1, 0.1).asDiagonal();
  const LqrSolution s = solve_dare(d.A_d, d.B_d, Q, scalarM(1000.0));

  const Eigen::MatrixXd res =
      d.A_d.transpose() * s.P * d.A_d - s.P -
      d.A_d.transpose() * s.P * d.B_d *
          (scalarM(1000.0) + d.B_d.transpose() * s.P * d.B_d)
              .inverse() *
          d.B_d.transpose() * s.P * d.A_d +
      Q;
  CHECK(res.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(spectral_radius(d.A_d - d.B_d * s.K) < 1.0);
  // PD certified by a successful Cholesky factorization.
  Eigen::LLT<Eigen::MatrixXd> llt(s.P);
  CHECK(llt.info() == Eigen::Success);
  CHECK((s.P - s.P.transpose()).norm() <= 1e-9 * s.P.norm());
}

TEST_CASE("care solution satisfies the continuous riccati equation") {
  const LinearModel lm = linearize_at_origin(kParams);
  const Eigen::Matrix4d Q = Eigen::Vector4d(200, 1, 0.1, 0.1).asDiagonal();
  const Eigen::MatrixXd P = solve_care(lm.A0, lm.B0, Q, scalarM(1000.0));
  const Eigen::MatrixXd res =
      lm.A0.transpose() * P + P * lm.A0 -
      P * lm.B0 * scalarM(1.0 / 1000.0) * lm.B0.transpose() * P + Q;
  CHECK(res.lpNorm<Eigen::Infinity>() <= 1e-6 * P.norm());
}

TEST_CASE("grid certificate") {
  const LinearModel lm = linearize_at_origin(kParams);
  const LtvStep d = discretize_ltv({lm.A0, lm.B0}, 0.05);
  const Eigen::Matrix4d Q = Eigen::Vector4d(200, 1, 0.1, 0.1).asDiagonal();
  const LqrSolution s = solve_dare(d.A_d, d.B_d, Q, scalarM(1000.0));
  const SchedulingBox box;

  SUBCASE("lqr gain passes on the full box") {
    const GridCertificate c = hurwitz_grid_check(s.K, kParams, box, 51, 0.05);
    CHECK(c.pass);
    CHECK(c.worst_spectral_radius < 1.0);
  }
  SUBCASE("zero gain fails on the open-loop unstable mode") {
    const GridCertificate c = hurwitz_grid_check(
        Eigen::MatrixXd::Zero(1, 4), kParams, box, 11, 0.05);
    CHECK_FALSE(c.pass);
  }
  SUBCASE("collapsed box reduces to the origin stability check") {
    SchedulingBox pt;
    pt.theta_min = pt.theta_max = 0.0;
    pt.thetadot_min = pt.thetadot_max = 0.0;
    const GridCertificate c = hurwitz_grid_check(s.K, kParams, pt, 2, 0.05);
    CHECK(c.pass);
    CHECK(c.worst_spectral_radius ==
          doctest::Approx(spectral_radius(d.A_d - d.B_d * s.K)).epsilon(1e-12));
  }
}

TEST_CASE("eigenvalue routine against characteristic-polynomial roots") {
  std::mt19937 rng(53);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::Matrix4d A = Eigen::Matrix4d::NullaryExpr([&] { return n(rng); });
    const double rho_qr = spectral_radius(A);
    double rho_poly = 0.0;
    for (const auto& root : char_poly_roots(A))
      rho_poly = std::max(rho_poly, std::abs(root));
    REQUIRE(std::abs(rho_qr - rho_poly) <= 1e-6 * std::max(1.0, rho_poly));
  }
}
