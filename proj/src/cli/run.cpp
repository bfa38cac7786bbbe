#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "grad2/cli.hpp"
#include "grad2/io.hpp"
#include "grad2/parallel.hpp"

namespace grad2::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string vec_str(const Vec& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out + ")";
}

std::string state_str(const State& z) {
  Vec all(z.x);
  all.insert(all.end(), z.y.begin(), z.y.end());
  return vec_str(all);
}

// |x - u*| + |y|
double distance_to(const State& z, ConstVecView u_star) {
  double dx = 0.0;
  for (std::size_t i = 0; i < z.x.size(); ++i) dx += (z.x[i] - u_star[i]) * (z.x[i] - u_star[i]);
  return std::sqrt(dx) + norm(z.y);
}

State state_from(const Vec& ic) {
  const auto n = static_cast<std::ptrdiff_t>(ic.size() / 2);
  return State{Vec(ic.begin(), ic.begin() + n), Vec(ic.begin() + n, ic.end())};
}

SystemConfig system_from(const RunConfig& c) {
  const std::size_t n = c.dimension();
  return SystemConfig(c.potential.build(n), c.a, c.u_star);
}

Trajectory integrate(const SystemConfig& s, const State& z0, double t_max, Method method,
                     double h, const IntegratorSettings& settings) {
  if (method == Method::kAdaptive) return integrate_adaptive(s, z0, t_max, settings);
  return integrate_fixed(s, z0, t_max, h, settings.sample_stride, method);
}

struct Output {
  const RunConfig& config;
  std::ostringstream report;

  std::filesystem::path path(const std::string& name) const { return config.out_dir / name; }

  void trajectory(const std::string& label, const Trajectory& traj, const SystemConfig& s) {
    write_trajectory_csv(path("trajectory_" + label + ".csv"), traj, s);
  }

  void portrait(const std::string& label, const std::vector<LabeledTrajectory>& list,
                const std::string& title) {
    if (!config.plot) return;
    PhaseSvgOptions opt;
    opt.title = title;
    render_phase_svg(list, path("phase_" + label + ".svg"), opt);
  }

  void finish() const {
    std::ofstream out(path("report.txt"), std::ios::binary);
    if (!out) throw InputError("out: cannot write report.txt in " + config.out_dir.string());
    out << report.str();
  }
};

void header(Output& o, const SystemConfig& s) {
  o.report << "command: " << o.config.command << "\n"
           << "potential: " << to_string(s.potential().kind()) << " (N = " << s.dimension()
           << ")\n"
           << "a: " << num(s.a()) << "\n"
           << "u_star: " << vec_str(s.u_star()) << "\n";
}

void describe_run(Output& o, const SystemConfig& s, const Trajectory& traj) {
  const State& z0 = traj.states.front();
  const State& zt = traj.back();
  o.report << "method: " << to_string(traj.method) << "\n"
           << "samples: " << traj.size() << "\n"
           << "steps_accepted: " << traj.steps_accepted << "\n"
           << "steps_rejected: " << traj.steps_rejected << "\n"
           << "initial_state: " << state_str(z0) << "\n"
           << "final_time: " << num(traj.times.back()) << "\n"
           << "final_state: " << state_str(zt) << "\n"
           << "final_distance: " << num(distance_to(zt, s.u_star())) << "\n"
           << "energy_initial: " << num(energy(s, z0)) << "\n"
           << "energy_final: " << num(energy(s, zt)) << "\n"
           << "lyapunov_initial: " << num(lyapunov(s, z0)) << "\n"
           << "lyapunov_final: " << num(lyapunov(s, zt)) << "\n";
}

int cmd_simulate(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const Trajectory traj = integrate(s, state_from(c.ic), c.t_max, c.method, c.h, c.settings);
  Output o{c, {}};
  header(o, s);
  describe_run(o, s, traj);
  o.trajectory("simulate", traj, s);
  o.portrait("simulate", {{"a = " + num(c.a), &traj}}, "simulate");
  o.finish();
  log << "final state " << state_str(traj.back()) << " at t = " << num(traj.times.back()) << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  SweepOptions opt;
  opt.settings = c.settings;
  opt.threads = c.threads;
  const SweepReport rep = damping_sweep(s, state_from(c.ic), c.a_values, c.t_max, opt);

  Output o{c, {}};
  header(o, s);
  std::vector<LabeledTrajectory> plotted;
  bool failed = false;
  for (const auto& e : rep.entries) {
    const std::string label = "a" + num(e.a);
    o.report << "[" << label << "]\n";
    if (!e.error.empty()) {
      o.report << "error: " << e.error << "\n";
      failed = true;
      continue;
    }
    o.report << "regime: " << to_string(e.regime->classification)
             << "\ncrossings: " << e.regime->crossings
             << "\nfinal_state: " << state_str(e.trajectory->back())
             << "\nfinal_distance: " << num(distance_to(e.trajectory->back(), s.u_star())) << "\n";
    if (e.decay) o.report << "gamma_fit: " << num(e.decay->gamma_fit) << "\n";
    if (e.time_to_tolerance) o.report << "time_to_tolerance: " << num(*e.time_to_tolerance) << "\n";
    o.trajectory(label, *e.trajectory, s.with_damping(e.a));
    plotted.push_back({"a = " + num(e.a), &*e.trajectory});
  }
  o.report << "sup_norm_damped: " << num(rep.sup_norm_damped) << "\n";
  if (rep.gamma_trend_slope)
    o.report << "gamma_trend: " << num(*rep.gamma_trend_intercept) << " + "
             << num(*rep.gamma_trend_slope) << " a\n";
  if (!plotted.empty()) o.portrait("sweep", plotted, "damping sweep");
  o.finish();
  log << rep.entries.size() << " damping values, sup norm " << num(rep.sup_norm_damped) << "\n";
  if (failed) {
    log << "error: integrator: at least one sweep entry failed (see report.txt)\n";
    return 3;
  }
  return 0;
}

int cmd_basin(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const std::size_t n = s.dimension();
  PhaseGrid grid;
  grid.axes = c.grid;
  if (grid.axes.empty()) grid.axes.assign(2 * n, AxisGrid{-2.0, 2.0, 21});
  BasinOptions opt;
  opt.settings = c.settings;
  opt.threads = c.threads;
  const BasinMap map = basin_map(s, grid, c.t_max, c.conv_tol, opt);

  Output o{c, {}};
  header(o, s);
  std::ofstream csv(o.path("basin.csv"), std::ios::binary);
  if (!csv) throw InputError("out: cannot write basin.csv");
  for (std::size_t i = 1; i <= n; ++i) csv << (i > 1 ? "," : "") << "x" << i;
  for (std::size_t i = 1; i <= n; ++i) csv << ",y" << i;
  csv << ",basin\n";
  std::vector<std::size_t> counts(map.equilibria.size(), 0);
  std::size_t unresolved = 0;
  for (std::size_t k = 0; k < map.assignment.size(); ++k) {
    const State z = map.grid.cell_center(k);
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", z.x[i]);
      csv << (i ? "," : "") << buf;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", z.y[i]);
      csv << "," << buf;
    }
    csv << "," << map.assignment[k] << "\n";
    if (map.assignment[k] == BasinMap::kUnresolved) ++unresolved;
    else ++counts[static_cast<std::size_t>(map.assignment[k])];
  }
  o.report << "cells: " << map.assignment.size() << "\n";
  for (std::size_t i = 0; i < map.equilibria.size(); ++i)
    o.report << "equilibrium " << i << ": " << vec_str(map.equilibria.points[i]) << " "
             << to_string(map.equilibria.classifications[i]) << ", cells " << counts[i] << "\n";
  o.report << "unresolved: " << unresolved << "\n";
  o.finish();
  log << map.assignment.size() << " cells, " << unresolved << " unresolved\n";
  return 0;
}

int cmd_decay(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const State z0 = state_from(c.ic);
  const Trajectory traj = integrate(s, z0, c.t_max, c.method, c.h, c.settings);
  const DecayFit fit = fit_decay_rate(traj, s.u_star());

  Output o{c, {}};
  header(o, s);
  describe_run(o, s, traj);
  o.report << "gamma_fit: " << num(fit.gamma_fit) << "\n"
           << "c_fit: " << num(fit.c_fit) << "\n"
           << "fit_window: [" << num(fit.t_start) << ", " << num(fit.t_end) << "]\n"
           << "fit_rms_residual: " << num(fit.rms_residual) << "\n";
  const double radius = std::max(1.0, distance_to(z0, s.u_star()));
  try {
    const LocalConstants lc = estimate_local_constants(s.potential(), s.u_star(), radius, 2000, 1);
    const DecayConstants dc = decay_constants(s, lc);
    o.report << "local_constants: alpha " << num(lc.alpha) << ", beta " << num(lc.beta) << ", mu "
             << num(lc.mu) << " on radius " << num(radius) << "\n"
             << "gamma_bound: " << num(dc.gamma) << "\n"
             << "C: " << num(lyapunov(s, z0) / dc.m1) << "\n";
  } catch (const HypothesisViolation& e) {
    o.report << "gamma_bound: unavailable (" << e.what() << ")\n";
  }
  o.trajectory("decay", traj, s);
  o.portrait("decay", {{"a = " + num(c.a), &traj}}, "decay");
  o.finish();
  log << "gamma_fit " << num(fit.gamma_fit) << "\n";
  return 0;
}

int cmd_critical(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const State z0 = state_from(c.ic);
  const CriticalDampingResult r = find_critical_damping(s, z0, c.a_lo, c.a_hi, c.tol, c.t_max);
  Output o{c, {}};
  header(o, s);
  o.report << "initial_state: " << state_str(z0) << "\n"
           << "a_star: " << num(r.a_star) << "\n"
           << "bracket: [" << num(r.bracket_lo) << ", " << num(r.bracket_hi) << "]\n"
           << "iterations: " << r.iterations << "\n";
  const SystemConfig at = s.with_damping(r.a_star);
  const Trajectory traj = integrate_adaptive(at, z0, c.t_max, c.settings);
  o.trajectory("critical", traj, at);
  o.portrait("critical", {{"a = " + num(r.a_star), &traj}}, "critical damping");
  o.finish();
  log << "a* = " << num(r.a_star) << "\n";
  return 0;
}

int cmd_conserve(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const State z0 = state_from(c.ic);
  const Method method = c.method == Method::kAdaptive ? Method::kLeapfrog : c.method;
  const Trajectory traj = integrate(s, z0, c.t_max, method, c.h, c.settings);
  const ClosedOrbitReport orbit = closed_orbit_check(s, z0, c.t_max, c.conv_tol, c.h);
  const double e0 = energy(s, z0);
  double drift = 0.0;
  for (const auto& z : traj.states) drift = std::max(drift, std::abs(energy(s, z) - e0));

  Output o{c, {}};
  header(o, s);
  describe_run(o, s, traj);
  o.report << "energy_drift: " << num(drift) << "\n";
  if (orbit.period)
    o.report << "period: " << num(*orbit.period) << "\nreturn_distance: "
             << num(orbit.return_distance) << "\n";
  else
    o.report << "period: none within t_max\nclosest_approach: " << num(orbit.return_distance)
             << "\n";
  o.trajectory("conserve", traj, s);
  o.portrait("conserve", {{"E = " + num(e0), &traj}}, "conservative orbit");
  o.finish();
  log << (orbit.period ? "period " + num(*orbit.period) : std::string("no return found")) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  const SystemConfig s = system_from(c);
  const State z0 = state_from(c.ic);
  const Trajectory traj = integrate_adaptive(s, z0, c.t_max, c.settings);
  Output o{c, {}};
  header(o, s);
  describe_run(o, s, traj);
  std::size_t failures = 0;
  const auto verdict = [&](const std::string& name, bool pass, double value) {
    o.report << (pass ? "PASS " : "FAIL ") << name << " " << num(value) << "\n";
    if (!pass) ++failures;
  };
  const double e0 = energy(s, z0);
  if (s.a() == 0.0) {
    double drift = 0.0;
    for (const auto& z : traj.states) drift = std::max(drift, std::abs(energy(s, z) - e0));
    verdict("energy_conservation", drift <= 1e-6 * (1.0 + std::abs(e0)), drift);
  } else {
    const EnergyReport er = verify_energy_dissipation(traj, s);
    verdict("energy_dissipation", er.max_residual <= 1e-4 * (1.0 + std::abs(e0)), er.max_residual);
    const MonotonicityReport mr = verify_lyapunov_monotonicity(traj, s, 1e-7);
    verdict("lyapunov_monotone", mr.pass, mr.max_increase);
    const double radius = std::max(1.0, distance_to(z0, s.u_star()));
    try {
      const LocalConstants lc =
          estimate_local_constants(s.potential(), s.u_star(), radius, 2000, 1);
      const DecayConstants dc = decay_constants(s, lc);
      const double v0 = lyapunov(s, z0);
      double worst = 0.0;
      for (std::size_t k = 0; k < traj.size(); ++k) {
        const double bound = v0 * std::exp(-dc.gamma * traj.times[k]) * (1.0 + 1e-6);
        worst = std::max(worst, lyapunov(s, traj.states[k]) - bound);
      }
      verdict("exponential_bound", worst <= 0.0, worst);
    } catch (const HypothesisViolation& e) {
      o.report << "SKIP exponential_bound (" << e.what() << ")\n";
    }
  }
  o.report << "failures: " << failures << "\n";
  o.trajectory("verify", traj, s);
  o.portrait("verify", {{"a = " + num(c.a), &traj}}, "verify");
  o.finish();
  log << failures << " failed check(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Reference figures

struct FigureRun {
  double a;
  Vec ic;
};

struct Figure {
  std::string id;
  std::string potential;
  double t_max;
  double stride;
  std::vector<FigureRun> runs;
  bool sweep;  // label runs by a rather than by initial condition
};

std::vector<Figure> figures() {
  const auto same_a = [](double a, std::vector<Vec> ics) {
    std::vector<FigureRun> out;
    for (auto& ic : ics) out.push_back({a, std::move(ic)});
    return out;
  };
  const auto same_ic = [](Vec ic, std::vector<double> as) {
    std::vector<FigureRun> out;
    for (double a : as) out.push_back({a, ic});
    return out;
  };
  return {
      {"quad_sweep", "quadratic", 15.0, 0.05, same_ic({2, 0}, {0, 0.5, 1.0, 2.0, 3.5, 6.0}), true},
      {"quad_conservative", "quadratic", 25.0, 0.05,
       same_a(0.0, {{-0.5, -1}, {2, 0}, {-2, -1}, {0, 2.5}}), false},
      {"dw_damped", "double_well", 40.0, 0.05,
       same_a(0.3, {{-1.5, 0.5}, {1.5, -0.2}, {0.01, 0}, {-0.01, 0}, {0, 2.0}}), false},
      {"dw_conservative", "double_well", 30.0, 0.05,
       same_a(0.0, {{1, 0.5}, {-1, -0.5}, {0, 1.2}, {0, 0.72}}), false},
      {"exp_damped", "exponential", 25.0, 0.05,
       same_a(0.5, {{1.5, 1}, {-1.5, -0.5}, {0, 2}, {0.5, -2}}), false},
      {"exp_conservative", "exponential", 15.0, 0.01,
       same_a(0.0, {{0.3, 0}, {0.8, 0}, {1.3, 0}, {0, 1.5}}), false},
      {"exp_sweep", "exponential", 20.0, 0.05, same_ic({1.5, 0}, {0.5, 1.0, 2.0, 3.5, 5.0}), true},
  };
}

void reproduce_figure(const Figure& f, const RunConfig& c, Output& o) {
  const Potential p = Potential::from_name(f.potential, 1);
  const auto minima = [&] {
    const EquilibriumSet eq = find_equilibria(p, Box{Interval{-3.0, 3.0}}, 61, 1e-10);
    std::vector<Vec> out;
    for (std::size_t i : eq.minima()) out.push_back(eq.points[i]);
    return out;
  }();

  std::vector<Trajectory> trajs(f.runs.size());
  IntegratorSettings settings = c.settings;
  settings.sample_stride = f.stride;
  parallel_for(f.runs.size(), c.threads, [&](std::size_t i) {
    const SystemConfig s(p, f.runs[i].a);
    trajs[i] = integrate_adaptive(s, state_from(f.runs[i].ic), f.t_max, settings);
  });

  o.report << "[" << f.id << "]\n"
           << "potential: " << f.potential << "\nt_max: " << num(f.t_max)
           << "\nstride: " << num(f.stride) << "\n";
  std::vector<LabeledTrajectory> plotted;
  for (std::size_t i = 0; i < f.runs.size(); ++i) {
    const FigureRun& r = f.runs[i];
    const SystemConfig s(p, r.a);
    const std::string label = f.id + "_" + std::to_string(i + 1);
    o.trajectory(label, trajs[i], s);
    const State& zt = trajs[i].back();
    o.report << label << ": a " << num(r.a) << ", ic " << vec_str(r.ic) << ", final "
             << state_str(zt);
    if (r.a > 0.0) {
      // nearest stable equilibrium of the terminal state
      std::size_t best = 0;
      double best_d = INFINITY;
      for (std::size_t m = 0; m < minima.size(); ++m) {
        const double d = distance_to(zt, minima[m]);
        if (d < best_d) best_d = d, best = m;
      }
      if (!minima.empty())
        o.report << ", nearest minimum " << vec_str(minima[best]) << " at distance "
                 << num(best_d);
    } else {
      o.report << ", energy drift "
               << num(std::abs(energy(s, zt) - energy(s, trajs[i].states.front())));
    }
    o.report << "\n";
    plotted.push_back({f.sweep ? "a = " + num(r.a) : vec_str(r.ic), &trajs[i]});
  }
  o.portrait(f.id, plotted, f.id);
}

int cmd_reproduce(const RunConfig& c, std::ostream& log) {
  Output o{c, {}};
  o.report << "command: reproduce\n";
  for (const Figure& f : figures()) {
    if (c.figure != "all" && c.figure != f.id) continue;
    reproduce_figure(f, c, o);
    log << f.id << ": " << f.runs.size() << " trajectories\n";
  }
  o.finish();
  return 0;
}

}  // namespace

int run(const RunConfig& c, std::ostream& log) {
  c.validate();
  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  if (ec) throw InputError("out: cannot create '" + c.out_dir.string() + "': " + ec.message());
  if (c.command == "simulate") return cmd_simulate(c, log);
  if (c.command == "sweep") return cmd_sweep(c, log);
  if (c.command == "basin") return cmd_basin(c, log);
  if (c.command == "decay") return cmd_decay(c, log);
  if (c.command == "critical") return cmd_critical(c, log);
  if (c.command == "conserve") return cmd_conserve(c, log);
  if (c.command == "verify") return cmd_verify(c, log);
  return cmd_reproduce(c, log);
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const char* env = std::getenv("GRAD2_THREADS");
    const RunConfig config =
        parse_command_line(argc, argv, env ? std::optional<std::string>(env) : std::nullopt);
    return run(config, out);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const HypothesisViolation& e) {
    err << "error: hypothesis violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace grad2::cli
