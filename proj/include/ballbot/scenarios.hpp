#ifndef BALLBOT_SCENARIOS_HPP
#define BALLBOT_SCENARIOS_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ballbot/errors.hpp"
#include "ballbot/integrators.hpp"
#include "ballbot/mpc.hpp"
#include "ballbot/params.hpp"
#include "ballbot/synthesis.hpp"

namespace ballbot {

struct TimingStats {
  double mean = 0.0;
  double std_dev = 0.0;
  double max = 0.0;
  int count = 0;
};

// Scenario 1: roll to 2*pi at t=1 s, hold for 2 s, return to the origin.
inline double scenario_1_reference(double t) {
  if (t < 1.0) return 0.0;
  if (t < 3.0) return 2.0 * M_PI;
  return 0.0;
}

// Scenario 2: Lissajous references per plane, in ball angle (rad). The
// Cartesian reference is r_b times these.
inline std::pair<double, double> scenario_2_reference(double t) {
  return {2.0 * M_PI * std::sin(0.3 * t), 2.0 * M_PI * std::sin(0.4 * t)};
}

// Scenario 3: constant single set point pi.
inline double scenario_3_reference(double /*t*/) { return M_PI; }

inline TimingStats timing_stats(const Trajectory& traj) {
  TimingStats s;
  std::vector<double> times;  // the final row records no solve
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    times.push_back(traj[i].solve_time);
  if (times.empty()) throw std::runtime_error("timing_stats: no solves");
  s.count = static_cast<int>(times.size());
  double sum = 0.0;
  for (double t : times) {
    sum += t;
    s.max = std::max(s.max, t);
  }
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double t : times) ss += (t - s.mean) * (t - s.mean);
  s.std_dev = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
  return s;
}

// CSV schema: t, phi, theta, phidot, thetadot, tau, J, solve_time_s, feasible
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,phi,theta,phidot,thetadot,tau,J,solve_time_s,feasible\n";
  out << std::setprecision(15);
  for (const auto& pt : traj) {
    out << pt.t << ',' << pt.x[kPhi] << ',' << pt.x[kTheta] << ','
        << pt.x[kPhiDot] << ',' << pt.x[kThetaDot] << ',' << pt.u << ','
        << pt.cost << ',' << pt.solve_time << ',' << (pt.feasible ? 1 : 0)
        << '\n';
  }
}

inline void write_trajectory_csv(const Trajectory& traj,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_trajectory_csv(traj, out);
}

inline Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("trajectory csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    TrajectoryPoint pt;
    char comma;
    int feasible = 1;
    ls >> pt.t >> comma >> pt.x[kPhi] >> comma >> pt.x[kTheta] >> comma >>
        pt.x[kPhiDot] >> comma >> pt.x[kThetaDot] >> comma >> pt.u >> comma >>
        pt.cost >> comma >> pt.solve_time >> comma >> feasible;
    if (ls.fail()) throw std::runtime_error("trajectory csv: malformed row");
    pt.feasible = feasible != 0;
    traj.push_back(pt);
  }
  return traj;
}

struct ScenarioSpec {
  std::string name;
  double duration = 4.0;
  double ts = 0.05;
  int N = 20;
  Eigen::Vector4d q_diag{200.0, 1.0, 0.1, 0.1};
  double R = 1000.0;
  bool guarantees = false;
  Bounds bounds = Bounds::paper();
  PhysicalParams params = preset::paper2024();
};

inline ScenarioSpec default_scenario(int which) {
  ScenarioSpec s;
  switch (which) {
    case 1:
      s.name = "s1";
      s.duration = 4.0;
      break;
    case 2:
      s.name = "s2";
      s.duration = 70.0;
      s.q_diag[0] = 1000.0;
      break;
    case 3:
      s.name = "s3";
      s.duration = 4.0;
      break;
    default:
      throw std::invalid_argument("scenario id must be 1, 2 or 3");
  }
  return s;
}

inline MpcConfig make_mpc_config(const ScenarioSpec& spec) {
  MpcConfig cfg;
  cfg.Q = spec.q_diag.asDiagonal();
  cfg.R = spec.R;
  cfg.N = spec.N;
  cfg.ts = spec.ts;
  cfg.bounds = spec.bounds;
  cfg.params = spec.params;
  cfg.terminal_constraint = spec.guarantees;
  if (!spec.guarantees) {
    const LinearModel lm = linearize_at_origin(spec.params);
    const LtvStep d = discretize_ltv({lm.A0, lm.B0}, spec.ts);
    Eigen::MatrixXd Rm(1, 1);
    Rm << spec.R;
    cfg.P_term = solve_dare(d.A_d, d.B_d, cfg.Q, Rm).P;
  }
  return cfg;
}

struct ScenarioResult {
  std::vector<Trajectory> trajectories;  // one per plane
  std::vector<std::string> plane_names;
};

// Runs scenario `which` (1, 2 or 3). Scenario 2 runs the two independent
// planar loops concurrently.
inline ScenarioResult run_scenario(int which, const ScenarioSpec& spec) {
  const MpcConfig cfg = make_mpc_config(spec);
  ScenarioResult result;
  const State x0 = State::Zero();

  if (which == 1) {
    result.trajectories.push_back(
        closed_loop(x0, scenario_1_reference, cfg, spec.duration));
    result.plane_names.push_back("yz");
  } else if (which == 2) {
    Trajectory tx, ty;
    std::exception_ptr err_x, err_y;
    std::thread worker([&] {
      try {
        tx = closed_loop(
            x0, [](double t) { return scenario_2_reference(t).first; }, cfg,
            spec.duration);
      } catch (...) {
        err_x = std::current_exception();
      }
    });
    try {
      ty = closed_loop(
          x0, [](double t) { return scenario_2_reference(t).second; }, cfg,
          spec.duration);
    } catch (...) {
      err_y = std::current_exception();
    }
    worker.join();
    if (err_x) std::rethrow_exception(err_x);
    if (err_y) std::rethrow_exception(err_y);
    result.trajectories.push_back(std::move(tx));
    result.plane_names.push_back("xz");
    result.trajectories.push_back(std::move(ty));
    result.plane_names.push_back("yz");
  } else if (which == 3) {
    result.trajectories.push_back(
        closed_loop(x0, scenario_3_reference, cfg, spec.duration));
    result.plane_names.push_back("yz");
  } else {
    throw std::invalid_argument("scenario id must be 1, 2 or 3");
  }
  return result;
}

// Open-loop comparison input for the `simulate` subcommand: a small-amplitude
// sum of sines keeping theta within about +-0.2 rad for the default model.
struct MultiharmonicInput {
  std::vector<double> amplitudes{0.02, 0.015, 0.01};
  std::vector<double> frequencies{0.5, 1.1, 2.3};  // rad/s
  std::vector<double> phases{0.0, 1.0, 2.0};

  double operator()(double t) const {
    double u = 0.0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
      u += amplitudes[i] * std::sin(frequencies[i] * t + phases[i]);
    return u;
  }
};

}  // namespace ballbot

#endif  // BALLBOT_SCENARIOS_HPP
