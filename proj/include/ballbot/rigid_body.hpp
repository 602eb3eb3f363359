#ifndef BALLBOT_RIGID_BODY_HPP
#define BALLBOT_RIGID_BODY_HPP

#include <Eigen/Dense>
#include <cmath>

#include "ballbot/errors.hpp"
#include "ballbot/params.hpp"

namespace ballbot {

// Pieces of M(q) qdd + C(q,qd) + D(qd) + G(q) = Btilde * tau_y.
struct RigidBodyMatrices {
  Eigen::Matrix2d M;
  Eigen::Vector2d C;
  Eigen::Vector2d D;
  Eigen::Vector2d G;
  Eigen::Vector2d Btilde;
};

struct MotorTorques {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
};

inline RigidBodyMatrices assemble_matrices(double theta, double thetadot,
                                           const PhysicalParams& p) {
  RigidBodyMatrices m;
  const double off = -p.b2 + p.ell * p.r_b * std::cos(theta);
  m.M << p.b1, off, off, p.b3;
  m.C << -p.ell * p.r_b * std::sin(theta) * thetadot * thetadot, 0.0;
  m.D << 0.0, 0.0;  // D depends on phidot, filled by the caller when needed
  m.G << 0.0, -p.ell * p.g * std::sin(theta);
  m.Btilde << p.r_b / p.r_w, -p.r_b / p.r_w;
  return m;
}

// State derivative (phidot, thetadot, qdd) with qdd = M^-1(-C - D - G + Btilde*tau).
// `disturbance` is an additive generalized-force 2-vector, zero by default.
inline State nonlinear_dynamics(const State& x, double tau_y,
                                const PhysicalParams& p,
                                const Eigen::Vector2d& disturbance =
                                    Eigen::Vector2d::Zero()) {
  const double theta = x[kTheta];
  const double det = p.det_mass(theta);
  if (std::abs(det) <= kDetGuard)
    throw SingularMass("nonlinear_dynamics: |det M(theta)| below guard");

  RigidBodyMatrices m = assemble_matrices(theta, x[kThetaDot], p);
  m.D[0] = p.b4 * x[kPhiDot];
  const Eigen::Vector2d rhs =
      -m.C - m.D - m.G - disturbance + m.Btilde * tau_y;
  // 2x2 inverse by the known determinant
  Eigen::Vector2d qdd;
  qdd[0] = (m.M(1, 1) * rhs[0] - m.M(0, 1) * rhs[1]) / det;
  qdd[1] = (-m.M(1, 0) * rhs[0] + m.M(0, 0) * rhs[1]) / det;

  State dx;
  dx << x[kPhiDot], x[kThetaDot], qdd[0], qdd[1];
  return dx;
}

// Virtual torques (tau_x, tau_y, tau_z) to the three motor torques.
inline MotorTorques virtual_to_motor_torques(double tau_x, double tau_y,
                                             double tau_z, double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  if (std::abs(c) < 1e-12 || std::abs(s) < 1e-12)
    throw DegenerateAngle("virtual_to_motor_torques: alpha in {0, pi/2}");
  const double sq3 = std::sqrt(3.0);
  MotorTorques t;
  t.tau1 = (2.0 / c * tau_x + tau_z / s) / 3.0;
  t.tau2 = (-tau_x / c + sq3 / c * tau_y + tau_z / s) / 3.0;
  t.tau3 = (-tau_x / c - sq3 / c * tau_y + tau_z / s) / 3.0;
  return t;
}

}  // namespace ballbot

#endif  // BALLBOT_RIGID_BODY_HPP
