#ifndef BALLBOT_PARAM_REFINE_HPP
#define BALLBOT_PARAM_REFINE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/params.hpp"

namespace ballbot {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix64d = Eigen::Matrix<double, 6, 4>;

struct RefineResult {
  Eigen::Vector4d b_star;
  double residual_norm = 0.0;
  std::vector<double> residual_history;
  int iterations = 0;
  bool converged = false;
};

// Origin-model entries h1..h6 as functions of b, geometry taken from `geom`.
inline Vector6d h_functions(const Eigen::Vector4d& b,
                            const PhysicalParams& geom) {
  const double b1 = b[0], b2 = b[1], b3 = b[2], b4 = b[3];
  const double l = geom.ell, rb = geom.r_b, rw = geom.r_w, g = geom.g;
  const double off = b2 - l * rb;
  const double d0 = b1 * b3 - off * off;
  if (std::abs(d0) <= kDetGuard)
    throw SingularMass("h_functions: |d(0)| below guard");
  Vector6d h;
  h[0] = g * l * off / d0;
  h[1] = -b3 * b4 / d0;
  h[2] = (b3 * rb - rb * off) / (rw * d0);
  h[3] = b1 * g * l / d0;
  h[4] = -b4 * off / d0;
  h[5] = (rb * off - b1 * rb) / (rw * d0);
  return h;
}

inline Vector6d residual_F(const Eigen::Vector4d& b, const LinearParams& p,
                           const PhysicalParams& geom) {
  return p.vec() - h_functions(b, geom);
}

// Central finite differences, step 1e-6 * max(1, |b_i|) per coordinate.
inline Matrix64d jacobian_F(const Eigen::Vector4d& b, const LinearParams& p,
                            const PhysicalParams& geom) {
  Matrix64d J;
  for (int i = 0; i < 4; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(b[i]));
    Eigen::Vector4d bp = b, bm = b;
    bp[i] += h;
    bm[i] -= h;
    J.col(i) = (residual_F(bp, p, geom) - residual_F(bm, p, geom)) / (2.0 * h);
  }
  return J;
}

// Damped Gauss-Newton on F(b) = p - h(b). The 6x4 Jacobian makes the Newton
// step a least-squares (pseudo-inverse) solve; backtracking halves the step
// until the residual decreases.
inline RefineResult newton_refine(const Eigen::Vector4d& b0,
                                  const LinearParams& p,
                                  const PhysicalParams& geom,
                                  double tol = 1e-9, int max_iter = 50) {
  RefineResult r;
  Eigen::Vector4d b = b0;
  Vector6d F = residual_F(b, p, geom);
  double norm = F.norm();
  r.residual_history.push_back(norm);

  int failed_attempts = 0;
  for (int k = 0; k < max_iter; ++k) {
    const Matrix64d J = jacobian_F(b, p, geom);
    Eigen::ColPivHouseholderQR<Matrix64d> qr(J);
    if (qr.rank() < 4)
      throw SingularJacobian("newton_refine: rank-deficient Jacobian");
    const Eigen::Vector4d step = qr.solve(F);

    double t = 1.0;
    bool accepted = false;
    Eigen::Vector4d b_new;
    Vector6d F_new;
    double norm_new = 0.0;
    for (int halving = 0; halving <= 10; ++halving) {
      b_new = b - t * step;
      try {
        F_new = residual_F(b_new, p, geom);
        norm_new = F_new.norm();
        if (norm_new < norm) {
          accepted = true;
          break;
        }
      } catch (const SingularMass&) {
        // step crossed the singular set; keep damping
      }
      t /= 2.0;
    }

    if (!accepted) {
      if (++failed_attempts >= 5)
        throw Diverged("newton_refine: residual not decreasing");
      r.residual_history.push_back(norm);
      r.iterations = k + 1;
      continue;
    }
    failed_attempts = 0;

    const double rel_change = std::abs(norm - norm_new) / std::max(1.0, norm);
    b = b_new;
    F = F_new;
    norm = norm_new;
    r.residual_history.push_back(norm);
    r.iterations = k + 1;
    if (rel_change < tol) {
      r.converged = true;
      break;
    }
  }

  r.b_star = b;
  r.residual_norm = norm;
  return r;
}

// Initialization respecting physical regularity: b1..b3 positive, b4 small.
inline Eigen::Vector4d default_b0() {
  return Eigen::Vector4d(0.002, 0.06, 0.14, -0.05);
}

}  // namespace ballbot

#endif  // BALLBOT_PARAM_REFINE_HPP
