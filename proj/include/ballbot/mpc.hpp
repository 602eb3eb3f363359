#ifndef BALLBOT_MPC_HPP
#define BALLBOT_MPC_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/integrators.hpp"
#include "ballbot/lpv.hpp"
#include "ballbot/params.hpp"
#include "ballbot/qp.hpp"
#include "ballbot/rigid_body.hpp"

namespace ballbot {

struct Bounds {
  State x_min;
  State x_max;
  double u_min = -1.5;
  double u_max = 1.5;

  // Published constraint table: phi free, theta +-pi/3, phidot +-10pi,
  // thetadot +-2pi, torque +-1.5 Nm.
  static Bounds paper() {
    Bounds b;
    const double inf = std::numeric_limits<double>::infinity();
    b.x_min << -inf, -M_PI / 3.0, -10.0 * M_PI, -2.0 * M_PI;
    b.x_max << inf, M_PI / 3.0, 10.0 * M_PI, 2.0 * M_PI;
    return b;
  }
};

struct MpcConfig {
  Eigen::Matrix4d Q = Eigen::Vector4d(200.0, 1.0, 0.1, 0.1).asDiagonal();
  double R = 1000.0;
  Eigen::Matrix4d P_term = Eigen::Matrix4d::Zero();  // ignored when terminal_constraint
  int N = 20;
  double ts = 0.05;
  Bounds bounds = Bounds::paper();
  bool terminal_constraint = false;
  PhysicalParams params;
  SchedulingBox box;
};

using SchedulingTrajectory = std::vector<SchedulingPoint>;  // length N+1

struct MpcStepResult {
  std::vector<double> u_seq;          // N inputs
  std::vector<State> x_pred;          // N+1 predicted states
  double cost = 0.0;                  // QP objective plus the constant term
  QpStatus qp_status = QpStatus::MaxIter;
  double solve_time = 0.0;
};

struct TrajectoryPoint {
  double t = 0.0;
  State x;
  double u = 0.0;
  double cost = 0.0;
  double solve_time = 0.0;
  bool feasible = true;
};

using Trajectory = std::vector<TrajectoryPoint>;

namespace detail {

struct Prediction {
  // x_i = free[i] + gain[i] * u, with gain[i] 4xN (columns j >= i are zero).
  std::vector<State> free;
  std::vector<Eigen::MatrixXd> gain;
};

inline Prediction propagate_ltv(const SchedulingTrajectory& rho_traj,
                                const State& x_k, const MpcConfig& cfg) {
  const int N = cfg.N;
  Prediction pred;
  pred.free.resize(N + 1);
  pred.gain.resize(N + 1);
  pred.free[0] = x_k;
  pred.gain[0] = Eigen::MatrixXd::Zero(4, N);
  for (int i = 0; i < N; ++i) {
    if (!cfg.box.contains(rho_traj[i], 0.1))
      throw SchedulingOutOfRange("mpc: scheduling node outside inflated box");
    const LtvStep s =
        discretize_ltv(lpv_matrices(rho_traj[i], cfg.params), cfg.ts);
    pred.free[i + 1] = s.A_d * pred.free[i];
    pred.gain[i + 1] = s.A_d * pred.gain[i];
    pred.gain[i + 1].col(i) += s.B_d;
  }
  return pred;
}

}  // namespace detail

// Condensed QP over z = (u_0..u_{N-1}): states eliminated with the per-node
// LTV steps; Q on stages 1..N-1, R on inputs, P (or the terminal equality)
// at stage N; box rows for states 1..N and inputs 0..N-1.
inline QpProblem build_condensed_qp(const SchedulingTrajectory& rho_traj,
                                    const State& x_k,
                                    const std::vector<State>& x_ref,
                                    const MpcConfig& cfg,
                                    double* constant_term = nullptr) {
  const int N = cfg.N;
  const detail::Prediction pred = detail::propagate_ltv(rho_traj, x_k, cfg);

  QpProblem qp;
  qp.H = Eigen::MatrixXd::Zero(N, N);
  qp.g = Eigen::VectorXd::Zero(N);
  double c0 = (x_k - x_ref[0]).dot(cfg.Q * (x_k - x_ref[0]));

  auto add_stage = [&](int i, const Eigen::Matrix4d& W) {
    const State e = pred.free[i] - x_ref[i];
    qp.H += 2.0 * pred.gain[i].transpose() * W * pred.gain[i];
    qp.g += 2.0 * pred.gain[i].transpose() * (W * e);
    c0 += e.dot(W * e);
  };
  for (int i = 1; i < N; ++i) add_stage(i, cfg.Q);
  if (!cfg.terminal_constraint) add_stage(N, cfg.P_term);
  qp.H.diagonal().array() += 2.0 * cfg.R;

  // Inequalities: finite state bounds for stages 1..N, then input bounds.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (int i = 1; i <= N; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (std::isfinite(cfg.bounds.x_max[j])) {
        rows.push_back(pred.gain[i].row(j));
        rhs.push_back(cfg.bounds.x_max[j] - pred.free[i][j]);
      }
      if (std::isfinite(cfg.bounds.x_min[j])) {
        rows.push_back(-pred.gain[i].row(j));
        rhs.push_back(pred.free[i][j] - cfg.bounds.x_min[j]);
      }
    }
  }
  const int m_state = static_cast<int>(rows.size());
  qp.G.resize(m_state + 2 * N, N);
  qp.h.resize(m_state + 2 * N);
  for (int r = 0; r < m_state; ++r) {
    qp.G.row(r) = rows[r].transpose();
    qp.h[r] = rhs[r];
  }
  for (int i = 0; i < N; ++i) {
    qp.G.row(m_state + 2 * i).setZero();
    qp.G(m_state + 2 * i, i) = 1.0;
    qp.h[m_state + 2 * i] = cfg.bounds.u_max;
    qp.G.row(m_state + 2 * i + 1).setZero();
    qp.G(m_state + 2 * i + 1, i) = -1.0;
    qp.h[m_state + 2 * i + 1] = -cfg.bounds.u_min;
  }

  if (cfg.terminal_constraint) {
    qp.A_eq = pred.gain[N];
    qp.b_eq = x_ref[N] - pred.free[N];
  } else {
    qp.A_eq.resize(0, N);
    qp.b_eq.resize(0);
  }

  if (constant_term) *constant_term = c0;
  return qp;
}

inline MpcStepResult mpc_step(const State& x_k,
                              const SchedulingTrajectory& rho_traj,
                              const std::vector<State>& x_ref,
                              const MpcConfig& cfg,
                              std::optional<Eigen::VectorXd> warm_start =
                                  std::nullopt) {
  double c0 = 0.0;
  const QpProblem qp = build_condensed_qp(rho_traj, x_k, x_ref, cfg, &c0);
  const QpSolution qs = solve_qp(qp, warm_start);

  MpcStepResult r;
  r.qp_status = qs.status;
  r.solve_time = qs.solve_time;
  if (qs.status != QpStatus::Optimal) return r;

  r.u_seq.assign(qs.z_star.data(), qs.z_star.data() + cfg.N);
  r.cost = qs.objective + c0;
  r.x_pred.resize(cfg.N + 1);
  r.x_pred[0] = x_k;
  for (int i = 0; i < cfg.N; ++i) {
    const LtvStep s =
        discretize_ltv(lpv_matrices(rho_traj[i], cfg.params), cfg.ts);
    r.x_pred[i + 1] = s.A_d * r.x_pred[i] + s.B_d * r.u_seq[i];
  }
  return r;
}

// Propagates the nonlinear RK4 predictor through u_seq and extracts the
// scheduling point at each node (N+1 points).
inline SchedulingTrajectory update_scheduling(const State& x_k,
                                              const std::vector<double>& u_seq,
                                              const MpcConfig& cfg) {
  SchedulingTrajectory rho;
  rho.reserve(u_seq.size() + 1);
  State x = x_k;
  rho.push_back(scheduling_map(x));
  for (double u : u_seq) {
    x = rk4_step(
        [&cfg](const State& xi, double ui) {
          return nonlinear_dynamics(xi, ui, cfg.params);
        },
        x, u, cfg.ts);
    rho.push_back(scheduling_map(x));
  }
  return rho;
}

// Shift-and-hold: drop node 0, duplicate the final node.
inline SchedulingTrajectory shift_scheduling(const SchedulingTrajectory& prev) {
  SchedulingTrajectory next(prev.begin() + 1, prev.end());
  next.push_back(prev.back());
  return next;
}

// Receding-horizon closed loop. `ref` maps time to the phi reference; stage
// reference vectors are (phi_ref, 0, 0, 0).
template <typename RefSignal>
Trajectory closed_loop(const State& x0, RefSignal&& ref, const MpcConfig& cfg,
                       double t_end) {
  const int steps = static_cast<int>(std::round(t_end / cfg.ts));
  Trajectory traj;
  traj.reserve(steps + 1);

  State x = x0;
  SchedulingTrajectory rho(cfg.N + 1, scheduling_map(x0));
  std::optional<Eigen::VectorXd> warm;

  for (int k = 0; k < steps; ++k) {
    std::vector<State> x_ref(cfg.N + 1);
    for (int i = 0; i <= cfg.N; ++i) {
      const double t = std::min((k + i) * cfg.ts, t_end);
      x_ref[i] << ref(t), 0.0, 0.0, 0.0;
    }

    const MpcStepResult step = mpc_step(x, rho, x_ref, cfg, warm);
    if (step.qp_status != QpStatus::Optimal) {
      TrajectoryPoint pt;
      pt.t = k * cfg.ts;
      pt.x = x;
      pt.feasible = false;
      traj.push_back(pt);
      throw QpFailure(step.qp_status == QpStatus::Infeasible
                          ? "closed_loop: QP infeasible"
                          : "closed_loop: QP iteration cap reached");
    }

    TrajectoryPoint pt;
    pt.t = k * cfg.ts;
    pt.x = x;
    pt.u = step.u_seq[0];
    pt.cost = step.cost;
    pt.solve_time = step.solve_time;
    traj.push_back(pt);

    const SchedulingTrajectory rho_new =
        update_scheduling(x, step.u_seq, cfg);
    x = simulate_plant(x, step.u_seq[0], cfg.ts, cfg.params);
    rho = shift_scheduling(rho_new);

    Eigen::VectorXd w(cfg.N);
    for (int i = 0; i < cfg.N - 1; ++i) w[i] = step.u_seq[i + 1];
    w[cfg.N - 1] = step.u_seq[cfg.N - 1];
    warm = w;
  }

  TrajectoryPoint last;
  last.t = steps * cfg.ts;
  last.x = x;
  traj.push_back(last);
  return traj;
}

}  // namespace ballbot

#endif  // BALLBOT_MPC_HPP
