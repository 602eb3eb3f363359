#ifndef BALLBOT_SYNTHESIS_HPP
#define BALLBOT_SYNTHESIS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "ballbot/errors.hpp"
#include "ballbot/integrators.hpp"
#include "ballbot/lpv.hpp"
#include "ballbot/params.hpp"

namespace ballbot {

struct LinearModel {
  Eigen::Matrix4d A0;
  Eigen::Vector4d B0;
};

struct LqrSolution {
  Eigen::MatrixXd P;  // terminal weight, symmetric PD
  Eigen::MatrixXd K;  // state-feedback gain
};

struct GridCertificate {
  int n_grid = 0;
  double worst_spectral_radius = 0.0;
  bool pass = false;
};

struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

inline LinearModel linearize_at_origin(const PhysicalParams& p) {
  const LpvMatrices m = lpv_matrices({0.0, 0.0}, p);
  return {m.A, m.B};
}

inline double spectral_radius(const Eigen::MatrixXd& A) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(A, false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

// Discrete algebraic Riccati equation via the structure-preserving doubling
// algorithm (SDA). Quadratically convergent for stabilizable/detectable pairs.
inline LqrSolution solve_dare(const Eigen::MatrixXd& A_d,
                              const Eigen::MatrixXd& B_d,
                              const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R, double tol = 1e-10,
                              int max_iter = 200) {
  const int n = static_cast<int>(A_d.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  Eigen::LLT<Eigen::MatrixXd> R_llt(R);
  if (R_llt.info() != Eigen::Success)
    throw std::invalid_argument("solve_dare: R must be positive definite");

  Eigen::MatrixXd A_k = A_d;
  Eigen::MatrixXd G_k = B_d * R_llt.solve(B_d.transpose());
  Eigen::MatrixXd H_k = Q;

  bool done = false;
  for (int k = 0; k < max_iter; ++k) {
    const Eigen::MatrixXd W = I + G_k * H_k;
    Eigen::PartialPivLU<Eigen::MatrixXd> W_lu(W);
    const Eigen::MatrixXd V1 = W_lu.solve(A_k);             // (I + G H)^-1 A
    const Eigen::MatrixXd V2 = W_lu.solve(G_k);             // (I + G H)^-1 G
    const Eigen::MatrixXd A_next = A_k * V1;
    const Eigen::MatrixXd G_next = G_k + A_k * V2 * A_k.transpose();
    const Eigen::MatrixXd H_next =
        H_k + V1.transpose() * H_k * A_k;
    const double delta = (H_next - H_k).norm();
    A_k = A_next;
    G_k = 0.5 * (G_next + G_next.transpose());
    H_k = 0.5 * (H_next + H_next.transpose());
    if (delta <= tol * std::max(1.0, H_k.norm())) {
      done = true;
      break;
    }
  }
  if (!done) throw NoConvergence("solve_dare: doubling did not converge");

  LqrSolution s;
  s.P = H_k;
  s.K = (R + B_d.transpose() * s.P * B_d)
            .ldlt()
            .solve(B_d.transpose() * s.P * A_d);

  // Self-certify: residual of the Riccati equation and closed-loop stability.
  const Eigen::MatrixXd res = A_d.transpose() * s.P * A_d - s.P -
                              A_d.transpose() * s.P * B_d * s.K + Q;
  if (res.cwiseAbs().maxCoeff() > 1e-8)
    throw NoConvergence("solve_dare: Riccati residual above 1e-8");
  if (spectral_radius(A_d - B_d * s.K) >= 1.0)
    throw NoConvergence("solve_dare: closed loop not Schur stable");
  return s;
}

// Continuous algebraic Riccati equation by Newton iteration on the Lyapunov
// equation, seeded from the discrete solution at a small sampling time.
inline Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& B,
                                  const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& R, double tol = 1e-10,
                                  int max_iter = 100) {
  const int n = static_cast<int>(A.rows());
  Eigen::LLT<Eigen::MatrixXd> R_llt(R);
  if (R_llt.info() != Eigen::Success)
    throw std::invalid_argument("solve_care: R must be positive definite");
  const Eigen::MatrixXd RinvBt = R_llt.solve(B.transpose());

  // Stabilizing initial guess from a fine discretization.
  const double h = 1e-3;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Ad = I + h * A + (h * h / 2.0) * A * A;
  const Eigen::MatrixXd Bd = h * B;
  Eigen::MatrixXd P = solve_dare(Ad, Bd, Q * h, R * h).P;

  for (int k = 0; k < max_iter; ++k) {
    // Newton-Kleinman: solve (A - B K)' P + P (A - B K) = -(Q + K' R K)
    const Eigen::MatrixXd K = RinvBt * P;
    const Eigen::MatrixXd Acl = A - B * K;
    const Eigen::MatrixXd Qk = Q + K.transpose() * R * K;
    // Lyapunov solve via Kronecker (n = 4 here, so 16x16 dense is cheap).
    const int n2 = n * n;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n2, n2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int r = 0; r < n; ++r) {
          L(i * n + j, r * n + j) += Acl(r, i);
          L(i * n + j, i * n + r) += Acl(r, j);
        }
    Eigen::VectorXd q(n2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q[i * n + j] = -Qk(i, j);
    const Eigen::VectorXd pvec = L.partialPivLu().solve(q);
    Eigen::MatrixXd P_next(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) P_next(i, j) = pvec[i * n + j];
    P_next = 0.5 * (P_next + P_next.transpose());
    const double delta = (P_next - P).norm();
    P = P_next;
    if (delta <= tol * std::max(1.0, P.norm())) return P;
  }
  throw NoConvergence("solve_care: Newton iteration did not converge");
}

// Evaluates the closed-loop spectral radius of A_d(rho) - B_d(rho) K on an
// n_grid x n_grid lattice over the scheduling box; pass iff max < 1.
inline GridCertificate hurwitz_grid_check(const Eigen::MatrixXd& K,
                                          const PhysicalParams& p,
                                          const SchedulingBox& box, int n_grid,
                                          double ts) {
  if (n_grid < 2)
    throw std::invalid_argument("hurwitz_grid_check: n_grid must be >= 2");
  GridCertificate cert;
  cert.n_grid = n_grid;
  for (int i = 0; i < n_grid; ++i) {
    const double th = box.theta_min + (box.theta_max - box.theta_min) * i /
                                          (n_grid - 1.0);
    for (int j = 0; j < n_grid; ++j) {
      const double om = box.thetadot_min +
                        (box.thetadot_max - box.thetadot_min) * j /
                            (n_grid - 1.0);
      const LtvStep s = discretize_ltv(lpv_matrices({th, om}, p), ts);
      const double r = spectral_radius(s.A_d - s.B_d * K);
      cert.worst_spectral_radius = std::max(cert.worst_spectral_radius, r);
    }
  }
  cert.pass = cert.worst_spectral_radius < 1.0;
  return cert;
}

}  // namespace ballbot

#endif  // BALLBOT_SYNTHESIS_HPP
