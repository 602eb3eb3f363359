#ifndef BALLBOT_LPV_HPP
#define BALLBOT_LPV_HPP

#include <Eigen/Dense>
#include <cmath>

#include "ballbot/errors.hpp"
#include "ballbot/params.hpp"
#include "ballbot/rigid_body.hpp"

namespace ballbot {

struct SchedulingPoint {
  double theta = 0.0;
  double thetadot = 0.0;
};

struct SchedulingBox {
  double theta_min = -M_PI / 3.0;
  double theta_max = M_PI / 3.0;
  double thetadot_min = -2.0 * M_PI;
  double thetadot_max = 2.0 * M_PI;

  bool contains(const SchedulingPoint& rho, double margin = 0.0) const {
    const double mt = margin * (theta_max - theta_min);
    const double md = margin * (thetadot_max - thetadot_min);
    return rho.theta >= theta_min - mt && rho.theta <= theta_max + mt &&
           rho.thetadot >= thetadot_min - md && rho.thetadot <= thetadot_max + md;
  }
};

struct LpvMatrices {
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
};

// Unnormalized sinc with a series fallback near zero.
inline double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

inline SchedulingPoint scheduling_map(const State& x) {
  return {x[kTheta], x[kThetaDot]};
}

inline LpvMatrices lpv_matrices(const SchedulingPoint& rho,
                                const PhysicalParams& p) {
  const double th = rho.theta;
  const double om = rho.thetadot;
  const double d = p.det_mass(th);
  if (std::abs(d) <= kDetGuard)
    throw SingularMass("lpv_matrices: |d(theta)| below guard");

  const double lrc = p.ell * p.r_b * std::cos(th);  // ell*r_b*cos(theta)
  const double lrs = p.ell * p.r_b * std::sin(th);
  const double off = p.b2 - lrc;                    // b2 - ell*r_b*cos(theta)

  LpvMatrices m;
  m.A.setZero();
  m.A(0, 2) = 1.0;
  m.A(1, 3) = 1.0;
  m.A(2, 1) = p.ell * p.g * sinc(th) * off / d;
  m.A(2, 2) = -p.b3 * p.b4 / d;
  m.A(2, 3) = p.b3 * lrs * om / d;
  m.A(3, 1) = p.b1 * p.ell * p.g * sinc(th) / d;
  m.A(3, 2) = -p.b4 * off / d;
  m.A(3, 3) = lrs * om * off / d;
  m.B.setZero();
  m.B[2] = p.r_b * (p.b3 - off) / (p.r_w * d);
  m.B[3] = p.r_b * (off - p.b1) / (p.r_w * d);
  return m;
}

// A(rho) x + B(rho) u; linear in (x, u) for fixed rho.
inline State lpv_dynamics_given_rho(const SchedulingPoint& rho, const State& x,
                                    double u, const PhysicalParams& p) {
  const LpvMatrices m = lpv_matrices(rho, p);
  return m.A * x + m.B * u;
}

}  // namespace ballbot

#endif  // BALLBOT_LPV_HPP
