#ifndef BALLBOT_INTEGRATORS_HPP
#define BALLBOT_INTEGRATORS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ballbot/errors.hpp"
#include "ballbot/lpv.hpp"
#include "ballbot/params.hpp"
#include "ballbot/rigid_body.hpp"

namespace ballbot {

struct LtvStep {
  Eigen::Matrix4d A_d;
  Eigen::Vector4d B_d;
  double ts = 0.0;
};

// Single RK4 step with zero-order-hold input. f(x, u) -> dx.
template <typename Dynamics>
State rk4_step(Dynamics&& f, const State& x, double u, double ts) {
  const State k1 = f(x, u);
  const State k2 = f(x + (ts / 2.0) * k1, u);
  const State k3 = f(x + (ts / 2.0) * k2, u);
  const State k4 = f(x + ts * k3, u);
  return x + (ts / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// RK4 applied to the fixed-rho linear pair in closed form:
//   A_d = I + ts A + ts^2 A^2/2 + ts^3 A^3/6 + ts^4 A^4/24
//   B_d = (ts I + ts^2 A/2 + ts^3 A^2/6 + ts^4 A^3/24) B
inline LtvStep discretize_ltv(const LpvMatrices& m, double ts) {
  const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
  const Eigen::Matrix4d A2 = m.A * m.A;
  const Eigen::Matrix4d A3 = A2 * m.A;
  LtvStep s;
  s.A_d = I + ts * m.A + (ts * ts / 2.0) * A2 + (ts * ts * ts / 6.0) * A3 +
          (ts * ts * ts * ts / 24.0) * A3 * m.A;
  s.B_d = (ts * I + (ts * ts / 2.0) * m.A + (ts * ts * ts / 6.0) * A2 +
           (ts * ts * ts * ts / 24.0) * A3) *
          m.B;
  s.ts = ts;
  return s;
}

namespace detail {

// Dormand-Prince 5(4) embedded pair, local error from the 4th-order weights.
template <typename Dynamics>
State dopri45(Dynamics&& f, const State& x0, double u, double t_end,
              double abs_tol, double rel_tol) {
  State x = x0;
  double t = 0.0;
  double h = t_end;
  const double h_min = 1e-14 * std::max(1.0, t_end);
  int rejected_in_a_row = 0;

  while (t < t_end) {
    h = std::min(h, t_end - t);
    const State k1 = f(x, u);
    const State k2 = f(x + h * (1.0 / 5.0) * k1, u);
    const State k3 = f(x + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), u);
    const State k4 =
        f(x + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3), u);
    const State k5 =
        f(x + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                   64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4),
          u);
    const State k6 =
        f(x + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                   46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                   5103.0 / 18656.0 * k5),
          u);
    const State x5 = x + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                              125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                              11.0 / 84.0 * k6);
    const State k7 = f(x5, u);
    const State x4 = x + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                              393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                              187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);

    double err = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double scale =
          abs_tol + rel_tol * std::max(std::abs(x[i]), std::abs(x5[i]));
      err = std::max(err, std::abs(x5[i] - x4[i]) / scale);
    }

    if (err <= 1.0) {
      t += h;
      x = x5;
      rejected_in_a_row = 0;
    } else {
      ++rejected_in_a_row;
      if (rejected_in_a_row > 60)
        throw StepFailure("dopri45: repeated step rejection");
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h *= factor;
    if (h < h_min) throw StepFailure("dopri45: step size underflow");
  }
  return x;
}

}  // namespace detail

// High-accuracy plant step: integrates the nonlinear dynamics over [0, ts]
// with constant input (ZOH) using an adaptive embedded RK 4/5 pair.
inline State simulate_plant(const State& x, double u_zoh, double ts,
                            const PhysicalParams& p, double abs_tol = 1e-9,
                            double rel_tol = 1e-9) {
  return detail::dopri45(
      [&p](const State& xi, double ui) { return nonlinear_dynamics(xi, ui, p); },
      x, u_zoh, ts, abs_tol, rel_tol);
}

}  // namespace ballbot

#endif  // BALLBOT_INTEGRATORS_HPP
