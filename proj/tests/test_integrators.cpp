#include <doctest.h>

#include <cmath>
#include <random>

#include "ballbot/integrators.hpp"
#include "ballbot/lpv.hpp"
#include "ballbot/params.hpp"
#include "ballbot/rigid_body.hpp"

using namespace ballbot;

namespace {
const PhysicalParams kParams = preset::paper2024();

State ballbot_f(const State& x, double u) {
  return nonlinear_dynamics(x, u, kParams);
}
}  // namespace

TEST_CASE("rk4 of the zero field is the identity") {
  State x;
  x << 1.0, -0.5, 2.0, 0.1;
  const State y = rk4_step([](const State&, double) { return State::Zero(); },
                           x, 0.3, 0.1);
  CHECK(y == x);
}

TEST_CASE("rk4 matches the truncated exponential on xdot = -x") {
  // One step of RK4 on xdot = -x from 1 with ts = 0.1 is the 4th-order
  // Taylor polynomial 1 - h + h^2/2 - h^3/6 + h^4/24 at h = 0.1.
  const State y = rk4_step(
      [](const State& x, double) { return State(-x); },
      State::Ones(), 0.0, 0.1);
  CHECK(y[0] == doctest::Approx(0.9048375).epsilon(1e-12));
}

TEST_CASE("rk4 vs adaptive plant step on the ballbot") {
  State x;
  x << 0.0, 0.05, 0.0, 0.0;
  State a = x;
  for (int i = 0; i < 10; ++i) a = rk4_step(ballbot_f, a, 0.0, 0.005);
  const State b = simulate_plant(x, 0.0, 0.05, kParams);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("discretize_ltv closed form") {
  SUBCASE("zero pair") {
    LpvMatrices m;
    m.A.setZero();
    m.B.setZero();
    const LtvStep s = discretize_ltv(m, 0.05);
    CHECK(s.A_d == Eigen::Matrix4d::Identity());
    CHECK(s.B_d.norm() == 0.0);
  }
  SUBCASE("scalar-like block matches the truncated exponential") {
    LpvMatrices m;
    m.A.setZero();
    m.A(0, 0) = -1.0;
    m.B.setZero();
    const LtvStep s = discretize_ltv(m, 0.1);
    CHECK(s.A_d(0, 0) == doctest::Approx(0.9048375).epsilon(1e-12));
  }
}

TEST_CASE("discretize_ltv equals rk4 on the frozen-rho linear dynamics") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> th(-M_PI / 3.0, M_PI / 3.0);
  std::uniform_real_distribution<double> om(-2.0 * M_PI, 2.0 * M_PI);
  std::uniform_real_distribution<double> v(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const SchedulingPoint rho{th(rng), om(rng)};
    const LpvMatrices m = lpv_matrices(rho, kParams);
    const LtvStep s = discretize_ltv(m, 0.05);
    State x = State::NullaryExpr([&] { return v(rng); });
    const double u = v(rng);
    const State via_matrices = s.A_d * x + s.B_d * u;
    const State via_rk4 = rk4_step(
        [&](const State& xi, double ui) {
          return State(m.A * xi + m.B * ui);
        },
        x, u, 0.05);
    const double scale = 1.0 + via_rk4.lpNorm<Eigen::Infinity>();
    REQUIRE((via_matrices - via_rk4).lpNorm<Eigen::Infinity>() <=
            1e-12 * scale);
  }
}

TEST_CASE("plant step fixes the equilibrium family") {
  for (double phi : {0.0, 2.5}) {
    State x;
    x << phi, 0.0, 0.0, 0.0;
    const State y = simulate_plant(x, 0.0, 0.1, kParams);
    CHECK((y - x).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("plant step self-convergence under tighter tolerances") {
  State x;
  x << 0.0, 0.05, 0.1, -0.2;
  const State a = simulate_plant(x, 0.2, 0.05, kParams, 1e-9, 1e-9);
  const State b = simulate_plant(x, 0.2, 0.05, kParams, 5e-10, 5e-10);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("order-4 convergence of rk4 against the adaptive reference") {
  State x;
  x << 0.0, 0.08, 0.2, -0.3;
  const double u = 0.4;
  // The fastest linearized mode has |lambda| near 50, so the asymptotic
  // order only shows for steps well below 1/50 s.
  const double T = 0.2;

  auto rk4_error = [&](double ts) {
    State y = x;
    const int n = static_cast<int>(std::round(T / ts));
    for (int i = 0; i < n; ++i) y = rk4_step(ballbot_f, y, u, ts);
    const State ref = simulate_plant(x, u, T, kParams, 1e-13, 1e-13);
    return (y - ref).lpNorm<Eigen::Infinity>();
  };

  const double e1 = rk4_error(0.01);
  const double e2 = rk4_error(0.005);
  const double e3 = rk4_error(0.0025);
  const double slope1 = std::log2(e1 / e2);
  const double slope2 = std::log2(e2 / e3);
  const double slope = 0.5 * (slope1 + slope2);
  CHECK(slope == doctest::Approx(4.0).epsilon(0.3 / 4.0));
}
