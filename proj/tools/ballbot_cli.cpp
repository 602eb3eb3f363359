// Command line front end: parameter refinement, controller synthesis,
// open-loop simulation and the three closed-loop scenarios.
//
// Exit codes: 0 success, 2 infeasible, 3 numerical failure, 4 config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ballbot/ballbot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConfig = 4;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string preset = "paper-2024";
  double ts = 0.05;
  int horizon = 20;
  bool guarantees = false;
};

ballbot::Config load_config(const CommonOpts& o) {
  if (o.config_path.empty()) return {};
  return ballbot::Config::load(o.config_path);
}

ballbot::PhysicalParams resolve_params(const CommonOpts& o,
                                       const ballbot::Config& cfg) {
  if (cfg.has("model.b1")) return cfg.physical_params();
  if (o.preset == "paper-2024") return ballbot::preset::paper2024();
  throw ballbot::ConfigError("unknown preset: " + o.preset);
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ballbot::ConfigError("cannot open output file: " + path);
  return file;
}

int run_refine(const CommonOpts& o) {
  const ballbot::Config cfg = load_config(o);
  ballbot::PhysicalParams geom = resolve_params(o, cfg);

  ballbot::LinearParams p = ballbot::preset::linearParams2024();
  if (cfg.has("ident.p1")) {
    p.p1 = cfg.get_double("ident.p1");
    p.p2 = cfg.get_double("ident.p2");
    p.p3 = cfg.get_double("ident.p3");
    p.p4 = cfg.get_double("ident.p4");
    p.p5 = cfg.get_double("ident.p5");
    p.p6 = cfg.get_double("ident.p6");
  }
  Eigen::Vector4d b0 = ballbot::default_b0();
  if (cfg.has("refine.b0_1")) {
    b0 << cfg.get_double("refine.b0_1"), cfg.get_double("refine.b0_2"),
        cfg.get_double("refine.b0_3"), cfg.get_double("refine.b0_4");
  }

  const ballbot::RefineResult r = ballbot::newton_refine(b0, p, geom);

  std::printf("refine: %s after %d iterations\n",
              r.converged ? "converged" : "stopped", r.iterations);
  std::printf("  b* = (%.6f, %.6f, %.6f, %.6f)\n", r.b_star[0], r.b_star[1],
              r.b_star[2], r.b_star[3]);
  std::printf("  residual norm = %.6f\n", r.residual_norm);

  if (!o.out_path.empty()) {
    std::ofstream out(o.out_path);
    if (!out)
      throw ballbot::ConfigError("cannot open output file: " + o.out_path);
    out << "iter,residual_norm\n" << std::setprecision(15);
    for (std::size_t i = 0; i < r.residual_history.size(); ++i)
      out << i << ',' << r.residual_history[i] << '\n';
    std::printf("  residual history written to %s\n", o.out_path.c_str());
  }
  return r.converged ? kExitOk : kExitNumerical;
}

int run_synthesize(const CommonOpts& o) {
  const ballbot::Config cfg = load_config(o);
  const ballbot::PhysicalParams params = resolve_params(o, cfg);

  const ballbot::LinearModel lm = ballbot::linearize_at_origin(params);
  const ballbot::LtvStep d = ballbot::discretize_ltv({lm.A0, lm.B0}, o.ts);
  const Eigen::Matrix4d Q =
      Eigen::Vector4d(cfg.get_double("mpc.q1", 200.0),
                      cfg.get_double("mpc.q2", 1.0),
                      cfg.get_double("mpc.q3", 0.1),
                      cfg.get_double("mpc.q4", 0.1))
          .asDiagonal();
  Eigen::MatrixXd R(1, 1);
  R << cfg.get_double("mpc.r", 1000.0);

  const ballbot::LqrSolution s = ballbot::solve_dare(d.A_d, d.B_d, Q, R);
  const ballbot::GridCertificate cert =
      ballbot::hurwitz_grid_check(s.K, params, ballbot::SchedulingBox{}, 51,
                                  o.ts);

  std::cout << std::setprecision(10) << "synthesize: ts = " << o.ts << "\n"
            << "P =\n" << s.P << "\nK = " << s.K << "\n"
            << "grid certificate: " << cert.n_grid << " x " << cert.n_grid
            << " nodes, worst spectral radius "
            << cert.worst_spectral_radius << (cert.pass ? " (pass)" : " (FAIL)")
            << "\n";

  if (!o.out_path.empty()) {
    ballbot::Config out_cfg = load_config(o);
    out_cfg.set_physical_params(params);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        out_cfg.set("lqr.p" + std::to_string(i + 1) + std::to_string(j + 1),
                    s.P(i, j));
    for (int j = 0; j < 4; ++j)
      out_cfg.set("lqr.k" + std::to_string(j + 1), s.K(0, j));
    std::ofstream out(o.out_path);
    if (!out)
      throw ballbot::ConfigError("cannot open output file: " + o.out_path);
    out_cfg.save(out);
    std::printf("config with P, K written to %s\n", o.out_path.c_str());
  }
  return cert.pass ? kExitOk : kExitNumerical;
}

int run_simulate(const CommonOpts& o, double duration) {
  const ballbot::Config cfg = load_config(o);
  const ballbot::PhysicalParams params = resolve_params(o, cfg);

  ballbot::MultiharmonicInput input;
  ballbot::Trajectory nonlinear, lpv_frozen;
  ballbot::State x_nl = ballbot::State::Zero();
  ballbot::State x_lpv = ballbot::State::Zero();
  const int steps = static_cast<int>(std::round(duration / o.ts));

  for (int k = 0; k <= steps; ++k) {
    const double t = k * o.ts;
    const double u = input(t);
    nonlinear.push_back({t, x_nl, u, 0.0, 0.0, true});
    lpv_frozen.push_back({t, x_lpv, u, 0.0, 0.0, true});
    if (k == steps) break;
    x_nl = ballbot::simulate_plant(x_nl, u, o.ts, params);
    // The LPV model evaluated along its own trajectory reproduces the
    // nonlinear flow; the interesting comparison is against RK4 as used in
    // the predictor.
    const ballbot::LpvMatrices m =
        ballbot::lpv_matrices(ballbot::scheduling_map(x_lpv), params);
    const ballbot::LtvStep d = ballbot::discretize_ltv(m, o.ts);
    x_lpv = d.A_d * x_lpv + d.B_d * u;
  }

  std::ofstream file;
  std::ostream& out = open_out(o.out_path, file);
  out << "t,phi_nl,theta_nl,phi_lpv,theta_lpv,tau\n" << std::setprecision(15);
  double worst = 0.0;
  for (std::size_t i = 0; i < nonlinear.size(); ++i) {
    out << nonlinear[i].t << ',' << nonlinear[i].x[ballbot::kPhi] << ','
        << nonlinear[i].x[ballbot::kTheta] << ','
        << lpv_frozen[i].x[ballbot::kPhi] << ','
        << lpv_frozen[i].x[ballbot::kTheta] << ',' << nonlinear[i].u << '\n';
    worst = std::max(worst,
                     (nonlinear[i].x - lpv_frozen[i].x).lpNorm<Eigen::Infinity>());
  }
  std::printf("simulate: %d steps, max state gap %.3e\n", steps, worst);
  return kExitOk;
}

int run_scenario_cmd(const CommonOpts& o, const std::string& which_name) {
  const int which = which_name == "s1" ? 1 : which_name == "s2" ? 2 : 3;
  const ballbot::Config cfg = load_config(o);

  ballbot::ScenarioSpec spec = ballbot::default_scenario(which);
  spec.ts = o.ts;
  spec.N = o.horizon;
  spec.guarantees = o.guarantees;
  spec.params = resolve_params(o, cfg);
  spec.duration = cfg.get_double("scenario.duration", spec.duration);

  ballbot::ScenarioResult result;
  try {
    result = ballbot::run_scenario(which, spec);
  } catch (const ballbot::QpFailure& e) {
    std::fprintf(stderr, "scenario %s: %s\n", which_name.c_str(), e.what());
    return kExitInfeasible;
  }

  for (std::size_t i = 0; i < result.trajectories.size(); ++i) {
    const ballbot::TimingStats s = ballbot::timing_stats(result.trajectories[i]);
    std::printf(
        "scenario %s plane %s: %d solves, mean %.5f s, std %.5f s, max %.5f s\n",
        which_name.c_str(), result.plane_names[i].c_str(), s.count, s.mean,
        s.std_dev, s.max);
    if (!o.out_path.empty()) {
      std::string path = o.out_path;
      if (result.trajectories.size() > 1) {
        const auto dot = path.rfind('.');
        const std::string suffix = "_" + result.plane_names[i];
        if (dot == std::string::npos)
          path += suffix;
        else
          path.insert(dot, suffix);
      }
      ballbot::write_trajectory_csv(result.trajectories[i], path);
      std::printf("  trajectory written to %s\n", path.c_str());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"planar ballbot: identification, synthesis and LPV-MPC"};
  app.require_subcommand(1);

  CommonOpts opts;
  // The upright equilibrium is unstable, so open-loop comparisons are only
  // meaningful over a fraction of a second.
  double sim_duration = 0.5;
  std::string scenario_name;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--ts", opts.ts, "sampling time [s]");
    sub->add_option("--horizon", opts.horizon, "prediction horizon N");
    sub->add_option("--out", opts.out_path, "output file path");
    sub->add_option("--config", opts.config_path, "config file path");
    sub->add_option("--preset", opts.preset, "parameter preset name");
    sub->add_flag("--guarantees", opts.guarantees,
                  "terminal equality constraint instead of terminal weight");
  };

  CLI::App* refine = app.add_subcommand(
      "refine", "refine nonlinear parameters from identified linear ones");
  add_common(refine);

  CLI::App* synthesize =
      app.add_subcommand("synthesize", "LQR terminal ingredients + grid check");
  add_common(synthesize);

  CLI::App* simulate = app.add_subcommand(
      "simulate", "open-loop multiharmonic comparison of model variants");
  add_common(simulate);
  simulate->add_option("--duration", sim_duration, "simulation length [s]");

  CLI::App* scenario =
      app.add_subcommand("scenario", "run a closed-loop tracking scenario");
  scenario->add_option("name", scenario_name, "one of s1, s2, s3")
      ->required()
      ->check(CLI::IsMember({"s1", "s2", "s3"}));
  add_common(scenario);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (refine->parsed()) return run_refine(opts);
    if (synthesize->parsed()) return run_synthesize(opts);
    if (simulate->parsed()) return run_simulate(opts, sim_duration);
    return run_scenario_cmd(opts, scenario_name);
  } catch (const ballbot::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ballbot::QpFailure& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
}
