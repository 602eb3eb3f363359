#ifndef BALLBOT_QP_HPP
#define BALLBOT_QP_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace ballbot {

// min 0.5 z'Hz + g'z  s.t.  G z <= h,  A_eq z = b_eq
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::MatrixXd A_eq;  // 0 rows when absent
  Eigen::VectorXd b_eq;

  int n() const { return static_cast<int>(H.rows()); }
  int m() const { return static_cast<int>(G.rows()); }
  int q() const { return static_cast<int>(A_eq.rows()); }
};

enum class QpStatus { Optimal, Infeasible, MaxIter };

struct QpSolution {
  Eigen::VectorXd z_star;
  Eigen::VectorXd lambda;  // inequality multipliers
  Eigen::VectorXd nu;      // equality multipliers
  double objective = 0.0;
  QpStatus status = QpStatus::MaxIter;
  int iterations = 0;
  double solve_time = 0.0;
};

namespace detail {

inline constexpr double kQpTol = 1e-9;       // KKT residual target
inline constexpr double kQpRegularize = 1e-10;

}  // namespace detail

// Primal-dual interior-point solve with Mehrotra-style centering. The
// contract is the 1e-8 KKT tolerance, certified by residuals at exit.
inline QpSolution solve_qp(const QpProblem& prob,
                           std::optional<Eigen::VectorXd> warm_start =
                               std::nullopt,
                           int max_iter = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = prob.n();
  const int m = prob.m();
  const int q = prob.q();

  QpSolution sol;
  auto finish = [&](QpStatus status, const Eigen::VectorXd& z, int iters) {
    sol.status = status;
    sol.z_star = z;
    sol.iterations = iters;
    sol.objective = 0.5 * z.dot(prob.H * z) + prob.g.dot(z);
    sol.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return sol;
  };

  Eigen::MatrixXd H = prob.H;
  H.diagonal().array() += detail::kQpRegularize;

  // Inconsistent equality system: certified by the least-squares residual.
  if (q > 0) {
    const Eigen::VectorXd z_ls =
        prob.A_eq.colPivHouseholderQr().solve(prob.b_eq);
    if ((prob.A_eq * z_ls - prob.b_eq).lpNorm<Eigen::Infinity>() >
        1e-8 * (1.0 + prob.b_eq.lpNorm<Eigen::Infinity>()))
      return finish(QpStatus::Infeasible, Eigen::VectorXd::Zero(n), 0);
  }

  if (m == 0 && q == 0) {
    const Eigen::VectorXd z = H.ldlt().solve(-prob.g);
    sol.lambda.resize(0);
    sol.nu.resize(0);
    return finish(QpStatus::Optimal, z, 0);
  }
  if (m == 0) {
    // Pure equality-constrained QP: one KKT solve.
    Eigen::MatrixXd kkt(n + q, n + q);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = H;
    kkt.topRightCorner(n, q) = prob.A_eq.transpose();
    kkt.bottomLeftCorner(q, n) = prob.A_eq;
    Eigen::VectorXd rhs(n + q);
    rhs << -prob.g, prob.b_eq;
    const Eigen::VectorXd zw = kkt.partialPivLu().solve(rhs);
    sol.lambda.resize(0);
    sol.nu = zw.tail(q);
    return finish(QpStatus::Optimal, zw.head(n), 0);
  }

  Eigen::VectorXd z = warm_start && warm_start->size() == n
                          ? *warm_start
                          : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (prob.h - prob.G * z).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(q);

  const double b_scale =
      1.0 + std::max(prob.h.size() ? prob.h.lpNorm<Eigen::Infinity>() : 0.0,
                     q ? prob.b_eq.lpNorm<Eigen::Infinity>() : 0.0);
  const double g_scale = 1.0 + prob.g.lpNorm<Eigen::Infinity>();

  double best_primal = 1e300;
  int stalled = 0;

  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd r_dual =
        H * z + prob.g + prob.G.transpose() * lam +
        (q ? Eigen::VectorXd(prob.A_eq.transpose() * nu)
           : Eigen::VectorXd::Zero(n));
    const Eigen::VectorXd r_ineq = prob.G * z + s - prob.h;
    const Eigen::VectorXd r_eq =
        q ? Eigen::VectorXd(prob.A_eq * z - prob.b_eq) : Eigen::VectorXd();
    const double mu = s.dot(lam) / m;

    const double primal_res =
        std::max(r_ineq.lpNorm<Eigen::Infinity>(),
                 q ? r_eq.lpNorm<Eigen::Infinity>() : 0.0);
    const double dual_res = r_dual.lpNorm<Eigen::Infinity>();

    if (primal_res <= detail::kQpTol * b_scale &&
        dual_res <= detail::kQpTol * g_scale && mu <= detail::kQpTol) {
      sol.lambda = lam;
      sol.nu = nu;
      return finish(QpStatus::Optimal, z, it - 1);
    }

    // Track primal progress for the infeasibility heuristic.
    if (primal_res < 0.9 * best_primal) {
      best_primal = primal_res;
      stalled = 0;
    } else if (mu < 1e-10 || lam.lpNorm<Eigen::Infinity>() > 1e10) {
      ++stalled;
    }
    if (stalled > 8 && primal_res > 1e-6 * b_scale)
      return finish(QpStatus::Infeasible, z, it - 1);

    // Reduced KKT: [H + G' (Lam/S) G, A'; A, 0]
    const Eigen::VectorXd w = lam.cwiseQuotient(s);
    Eigen::MatrixXd M(n + q, n + q);
    M.setZero();
    M.topLeftCorner(n, n) =
        H + prob.G.transpose() * w.asDiagonal() * prob.G;
    if (q) {
      M.topRightCorner(n, q) = prob.A_eq.transpose();
      M.bottomLeftCorner(q, n) = prob.A_eq;
      M.bottomRightCorner(q, q).diagonal().array() -= detail::kQpRegularize;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> M_lu(M);

    auto solve_step = [&](const Eigen::VectorXd& r_cent) {
      // r_cent is the target for the complementarity product S*Lam.
      // dlam = (r_cent - lam .* (r_ineq + G dz)) ./ s  after eliminating ds.
      Eigen::VectorXd rhs(n + q);
      rhs.head(n) =
          -r_dual - prob.G.transpose() *
                        (r_cent.cwiseQuotient(s) + w.cwiseProduct(r_ineq));
      if (q) rhs.tail(q) = -r_eq;
      const Eigen::VectorXd dzw = M_lu.solve(rhs);
      return dzw;
    };

    // Predictor (affine) step: drive S*Lam to zero.
    const Eigen::VectorXd r_cent_aff = -s.cwiseProduct(lam);
    const Eigen::VectorXd dzw_aff = solve_step(r_cent_aff);
    const Eigen::VectorXd dz_aff = dzw_aff.head(n);
    const Eigen::VectorXd ds_aff = -r_ineq - prob.G * dz_aff;
    const Eigen::VectorXd dlam_aff =
        (r_cent_aff - lam.cwiseProduct(ds_aff)).cwiseQuotient(s);

    auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
      return a;
    };
    const double a_aff =
        std::min(max_step(s, ds_aff), max_step(lam, dlam_aff));
    const double mu_aff =
        (s + a_aff * ds_aff).dot(lam + a_aff * dlam_aff) / m;
    const double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3);

    // Corrector with centering.
    const Eigen::VectorXd r_cent =
        Eigen::VectorXd::Constant(m, sigma * mu) - s.cwiseProduct(lam) -
        ds_aff.cwiseProduct(dlam_aff);
    const Eigen::VectorXd dzw = solve_step(r_cent);
    const Eigen::VectorXd dz = dzw.head(n);
    const Eigen::VectorXd dnu = q ? Eigen::VectorXd(dzw.tail(q))
                                  : Eigen::VectorXd();
    const Eigen::VectorXd ds = -r_ineq - prob.G * dz;
    const Eigen::VectorXd dlam =
        (r_cent - lam.cwiseProduct(ds)).cwiseQuotient(s);

    const double a =
        std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(lam, dlam)));
    z += a * dz;
    s += a * ds;
    lam += a * dlam;
    if (q) nu += a * dnu;

    if (!z.allFinite() || z.lpNorm<Eigen::Infinity>() > 1e12)
      return finish(QpStatus::Infeasible, z, it);
  }

  // Out of iterations: classify by the remaining primal residual.
  const double primal_res = std::max(
      (prob.G * z + s - prob.h).lpNorm<Eigen::Infinity>(),
      q ? (prob.A_eq * z - prob.b_eq).lpNorm<Eigen::Infinity>() : 0.0);
  sol.lambda = lam;
  sol.nu = nu;
  return finish(primal_res > 1e-6 * b_scale ? QpStatus::Infeasible
                                            : QpStatus::MaxIter,
                z, max_iter);
}

}  // namespace ballbot

#endif  // BALLBOT_QP_HPP
