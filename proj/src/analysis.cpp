#include "grad2/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "grad2/parallel.hpp"

namespace grad2 {

namespace {

double phase_distance(const State& z, ConstVecView u_star) {
  return norm(sub(z.x, u_star)) + norm(z.y);
}

void check_trajectory(const Trajectory& traj, std::size_t n) {
  if (traj.times.size() != traj.states.size())
    throw InputError("trajectory times and states differ in length");
  for (const auto& z : traj.states) {
    require_dimension(z.x, n, "trajectory position");
    require_dimension(z.y, n, "trajectory velocity");
  }
}

}  // namespace

MonotonicityReport verify_lyapunov_monotonicity(const Trajectory& traj, const SystemConfig& s,
                                                double slack, std::optional<double> ball_radius) {
  if (!(s.a() > 0.0)) throw InputError("Lyapunov monotonicity requires a > 0");
  if (!(slack >= 0.0)) throw InputError("slack must be nonnegative");
  check_trajectory(traj, s.dimension());
  MonotonicityReport report;
  const auto in_ball = [&](const State& z) {
    return !ball_radius || norm(sub(z.x, s.u_star())) <= *ball_radius;
  };
  for (std::size_t k = 0; k + 1 < traj.states.size(); ++k) {
    if (!in_ball(traj.states[k]) || !in_ball(traj.states[k + 1])) continue;
    const double inc = lyapunov(s, traj.states[k + 1]) - lyapunov(s, traj.states[k]);
    report.max_increase = report.pairs_checked == 0 ? inc : std::max(report.max_increase, inc);
    ++report.pairs_checked;
  }
  if (report.pairs_checked == 0) report.max_increase = 0.0;
  report.pass = report.max_increase <= slack;
  return report;
}

EnergyReport verify_energy_dissipation(const Trajectory& traj, const SystemConfig& s) {
  if (traj.size() < 2) throw InputError("energy check needs at least two samples");
  check_trajectory(traj, s.dimension());
  const double e0 = energy(s, traj.states.front());
  double integral = 0.0;
  double prev = norm_sq(traj.states.front().y);
  EnergyReport report;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double cur = norm_sq(traj.states[k].y);
    integral += 0.5 * (traj.times[k] - traj.times[k - 1]) * (prev + cur);
    prev = cur;
    const double residual = std::abs(energy(s, traj.states[k]) - e0 + s.a() * integral);
    report.max_residual = std::max(report.max_residual, residual);
  }
  return report;
}

DecayFit fit_decay_rate(const Trajectory& traj, ConstVecView u_star, double window_fraction,
                        double floor) {
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw InputError("window_fraction must lie in (0, 1)");
  if (traj.size() < 2) throw InputError("decay fit needs at least two samples");
  check_trajectory(traj, u_star.size());

  std::vector<std::size_t> above;
  for (std::size_t k = 0; k < traj.size(); ++k)
    if (phase_distance(traj.states[k], u_star) > floor) above.push_back(k);
  if (above.size() < 2)
    throw NumericError("degenerate fit: norm below the floor throughout the window");
  if (!(phase_distance(traj.back(), u_star) < phase_distance(traj.states.front(), u_star)))
    throw InputError("decay fit requires a decaying trajectory");

  const auto take = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(above.size()))));
  const std::vector<std::size_t> window(above.end() - static_cast<std::ptrdiff_t>(take),
                                        above.end());

  double st = 0.0, sl = 0.0;
  for (std::size_t k : window) {
    st += traj.times[k];
    sl += std::log(phase_distance(traj.states[k], u_star));
  }
  const double count = static_cast<double>(window.size());
  const double t_mean = st / count;
  const double l_mean = sl / count;
  double stt = 0.0, stl = 0.0;
  for (std::size_t k : window) {
    const double dt = traj.times[k] - t_mean;
    stt += dt * dt;
    stl += dt * (std::log(phase_distance(traj.states[k], u_star)) - l_mean);
  }
  if (!(stt > 0.0)) throw NumericError("degenerate fit: window spans no time");
  const double slope = stl / stt;
  const double intercept = l_mean - slope * t_mean;
  double ss = 0.0;
  for (std::size_t k : window) {
    const double r =
        std::log(phase_distance(traj.states[k], u_star)) - (intercept + slope * traj.times[k]);
    ss += r * r;
  }
  return DecayFit{.c_fit = std::exp(intercept),
                  .gamma_fit = -slope,
                  .t_start = traj.times[window.front()],
                  .t_end = traj.times[window.back()],
                  .rms_residual = std::sqrt(ss / count)};
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kOscillatoryNondecaying: return "oscillatory_nondecaying";
    case Regime::kUnderdamped: return "underdamped";
    case Regime::kNonoscillatoryDecaying: return "nonoscillatory_decaying";
    case Regime::kInconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Vec default_probe_direction(const State& z0, ConstVecView u_star) {
  Vec d = sub(z0.x, u_star);
  double len = norm(d);
  if (len == 0.0) {
    d = z0.y;
    len = norm(d);
  }
  if (len == 0.0) {
    d.assign(z0.x.size(), 0.0);
    d[0] = 1.0;
    return d;
  }
  for (auto& v : d) v /= len;
  return d;
}

RegimeReport classify_regime(const Trajectory& traj, ConstVecView u_star,
                             ConstVecView probe_direction, double decay_ratio) {
  if (traj.size() < 2) throw InputError("regime classification needs at least two samples");
  check_trajectory(traj, u_star.size());
  require_dimension(probe_direction, u_star.size(), "probe direction");
  const double len = norm(probe_direction);
  if (!(len > 0.0)) throw InputError("probe direction must be nonzero");
  Vec d(probe_direction.begin(), probe_direction.end());
  for (auto& v : d) v /= len;

  RegimeReport report;
  int last_sign = 0;
  for (const auto& z : traj.states) {
    const Vec xi = sub(z.x, u_star);
    const double proj = dot(xi, d);
    const double scale = norm(xi) + norm(z.y);
    if (proj == 0.0 || std::abs(proj) < 1e-9 * scale) continue;
    const int sign = proj > 0.0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++report.crossings;
    last_sign = sign;
  }

  const double initial = phase_distance(traj.states.front(), u_star);
  const std::size_t tail_start = traj.size() - std::max<std::size_t>(1, traj.size() / 10);
  double tail_max = 0.0;
  for (std::size_t k = tail_start; k < traj.size(); ++k)
    tail_max = std::max(tail_max, phase_distance(traj.states[k], u_star));
  report.converged = traj.terminal_event == TerminalEvent::kConverged ||
                     tail_max <= decay_ratio * initial || initial == 0.0;

  const bool oscillating = report.crossings >= 2;
  if (report.converged) {
    report.classification = oscillating ? Regime::kUnderdamped : Regime::kNonoscillatoryDecaying;
  } else {
    report.classification = oscillating ? Regime::kOscillatoryNondecaying : Regime::kInconclusive;
  }
  return report;
}

IntegratorSettings critical_search_settings() {
  IntegratorSettings s;
  s.rel_tol = 1e-10;
  s.abs_tol = 1e-300;
  s.sample_stride = 0.01;
  return s;
}

CriticalDampingResult find_critical_damping(const SystemConfig& system_template, const State& ic,
                                            double a_lo, double a_hi, double tol, double t_max,
                                            const IntegratorSettings& settings) {
  if (!(a_lo >= 0.0 && a_hi > a_lo)) throw InputError("a_range must satisfy 0 <= a_lo < a_hi");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  const Vec probe = default_probe_direction(ic, system_template.u_star());
  const auto oscillates = [&](double a) {
    const SystemConfig s = system_template.with_damping(a);
    const Trajectory traj = integrate_adaptive(s, ic, t_max, settings);
    return classify_regime(traj, s.u_star(), probe).crossings >= 2;
  };
  const bool lo_osc = oscillates(a_lo);
  const bool hi_osc = oscillates(a_hi);
  if (lo_osc == hi_osc)
    throw InputError("bracket error: oscillation predicate is " +
                     std::string(lo_osc ? "true" : "false") + " at both a = " +
                     std::to_string(a_lo) + " and a = " + std::to_string(a_hi));
  CriticalDampingResult r{.bracket_lo = a_lo, .bracket_hi = a_hi};
  while (r.bracket_hi - r.bracket_lo > tol) {
    const double mid = 0.5 * (r.bracket_lo + r.bracket_hi);
    (oscillates(mid) == lo_osc ? r.bracket_lo : r.bracket_hi) = mid;
    ++r.iterations;
  }
  r.a_star = 0.5 * (r.bracket_lo + r.bracket_hi);
  return r;
}

// ---------------------------------------------------------------------------

std::size_t PhaseGrid::cell_count() const {
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.count;
  return total;
}

State PhaseGrid::cell_center(std::size_t flat) const {
  const std::size_t n = axes.size() / 2;
  State z{Vec(n), Vec(n)};
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const std::size_t i = flat % axes[k].count;
    flat /= axes[k].count;
    (k < n ? z.x[k] : z.y[k - n]) = axes[k].center(i);
  }
  return z;
}

BasinMap basin_map(const SystemConfig& s, const PhaseGrid& grid, double t_max, double conv_tol,
                   const BasinOptions& options) {
  if (!(s.a() > 0.0)) throw InputError("basin map requires a > 0");
  if (!(conv_tol > 0.0)) throw InputError("conv_tol must be positive");
  const std::size_t n = s.dimension();
  if (grid.axes.size() != 2 * n) throw InputError("basin grid needs 2N axes (positions, velocities)");
  for (const auto& ax : grid.axes) {
    if (ax.count == 0) throw InputError("basin grid axis counts must be positive");
    if (ax.hi < ax.lo) throw InputError("basin grid axes need lo <= hi");
  }

  Box box = options.equilibria_box;
  if (box.empty()) {
    double reach = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      reach = std::max({reach, std::abs(grid.axes[k].lo), std::abs(grid.axes[k].hi),
                        std::abs(s.u_star()[k])});
    }
    box.assign(n, Interval{-(2.0 * reach + 1.0), 2.0 * reach + 1.0});
  }
  std::size_t eq_grid = options.equilibria_grid;
  if (eq_grid == 0) eq_grid = n == 1 ? 81 : n == 2 ? 41 : 11;

  BasinMap map;
  map.grid = grid;
  map.equilibria = find_equilibria(s.potential(), box, eq_grid, 1e-10);
  const auto minima = map.equilibria.minima();
  if (minima.empty()) throw InputError("basin map: no minimum of the potential was found");

  const auto nearest = [&](const State& z) -> std::pair<int, double> {
    int best = BasinMap::kUnresolved;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m : minima) {
      const Vec dx = sub(z.x, map.equilibria.points[m]);
      const double d = std::sqrt(norm_sq(dx) + norm_sq(z.y));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(m);
      }
    }
    return {best, best_d};
  };

  const std::size_t cells = grid.cell_count();
  map.assignment.assign(cells, BasinMap::kUnresolved);
  parallel_for(cells, options.threads, [&](std::size_t c) {
    const State z0 = grid.cell_center(c);
    std::size_t consecutive = 0;
    auto monitor = [&](std::size_t, double, const State& z) -> std::optional<TerminalEvent> {
      consecutive = nearest(z).second <= conv_tol ? consecutive + 1 : 0;
      if (consecutive >= 3) return TerminalEvent::kConverged;
      return std::nullopt;
    };
    try {
      const Trajectory traj = integrate_adaptive_monitored(s, z0, t_max, options.settings, monitor);
      const auto [idx, d] = nearest(traj.back());
      if (d <= conv_tol) map.assignment[c] = idx;
    } catch (const NumericError&) {
      // left unresolved
    }
  });
  return map;
}

// ---------------------------------------------------------------------------

namespace {

State hermite_state(const State& z0, const State& f0, const State& z1, const State& f1, double h,
                    double theta) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + theta;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  State out{Vec(z0.x.size()), Vec(z0.y.size())};
  for (std::size_t i = 0; i < z0.x.size(); ++i) {
    out.x[i] = h00 * z0.x[i] + h10 * h * f0.x[i] + h01 * z1.x[i] + h11 * h * f1.x[i];
    out.y[i] = h00 * z0.y[i] + h10 * h * f0.y[i] + h01 * z1.y[i] + h11 * h * f1.y[i];
  }
  return out;
}

double state_distance(const State& a, const State& b) {
  return std::sqrt(norm_sq(sub(a.x, b.x)) + norm_sq(sub(a.y, b.y)));
}

}  // namespace

ClosedOrbitReport closed_orbit_check(const SystemConfig& s, const State& z0, double t_max,
                                     double tol, double h) {
  if (s.a() != 0.0) throw InputError("closed orbit check requires the conservative case (a = 0)");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (!(h > 0.0)) throw InputError("step size h must be positive");
  if (!(t_max > 0.0)) throw InputError("t_max must be positive");
  const State f0 = vector_field(s, z0);
  if (norm(f0.x) + norm(f0.y) == 0.0)
    throw InputError("closed orbit check needs a non-equilibrium initial state");

  // Closest approach to z0 on the Hermite interpolant over one step.
  const auto refine = [&](const State& za, const State& zb, double ta) {
    const State fa = vector_field(s, za);
    const State fb = vector_field(s, zb);
    const auto dist = [&](double th) { return state_distance(hermite_state(za, fa, zb, fb, h, th), z0); };
    constexpr double kInvPhi = 0.6180339887498949;
    double lo = 0.0, hi = 1.0;
    double m1 = hi - kInvPhi * (hi - lo), m2 = lo + kInvPhi * (hi - lo);
    double d1 = dist(m1), d2 = dist(m2);
    for (int it = 0; it < 80; ++it) {
      if (d1 < d2) {
        hi = m2;
        m2 = m1;
        d2 = d1;
        m1 = hi - kInvPhi * (hi - lo);
        d1 = dist(m1);
      } else {
        lo = m1;
        m1 = m2;
        d1 = d2;
        m2 = lo + kInvPhi * (hi - lo);
        d2 = dist(m2);
      }
    }
    const double th = 0.5 * (lo + hi);
    double best_th = th, best_d = dist(th);
    for (double edge : {0.0, 1.0}) {
      const double d = dist(edge);
      if (d < best_d) {
        best_d = d;
        best_th = edge;
      }
    }
    return std::pair<double, double>{ta + best_th * h, best_d};
  };

  ClosedOrbitReport report;
  report.return_distance = std::numeric_limits<double>::infinity();
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / h));
  State prev2 = z0, prev1 = z0, cur = z0;
  double d_prev2 = 0.0, d_prev1 = 0.0;
  bool left = false;
  for (std::size_t k = 1; k <= steps; ++k) {
    cur = step_leapfrog(s, prev1, h);
    const double d = state_distance(cur, z0);
    if (!left) {
      if (d > 10.0 * tol) left = true;
    } else if (k >= 3 && d_prev1 < d_prev2 && d_prev1 <= d) {
      // sample k-1 is a discrete local minimum of the distance to z0
      const double t_prev2 = static_cast<double>(k - 2) * h;
      const double t_prev1 = static_cast<double>(k - 1) * h;
      auto a = refine(prev2, prev1, t_prev2);
      auto b = refine(prev1, cur, t_prev1);
      const auto& best = a.second <= b.second ? a : b;
      if (best.second <= tol) {
        report.period = best.first;
        report.return_distance = best.second;
        return report;
      }
      report.return_distance = std::min(report.return_distance, best.second);
    }
    prev2 = std::move(prev1);
    prev1 = cur;
    d_prev2 = d_prev1;
    d_prev1 = d;
  }
  // the orbit may still be approaching z0 at t_max
  if (left) report.return_distance = std::min(report.return_distance, d_prev1);
  return report;
}

// ---------------------------------------------------------------------------

SweepReport damping_sweep(const SystemConfig& system_template, const State& ic,
                          const std::vector<double>& a_values, double t_max,
                          const SweepOptions& options) {
  if (a_values.empty()) throw InputError("a_values must be non-empty");
  for (double a : a_values)
    if (!(a >= 0.0)) throw InputError("damping values must be >= 0");
  const Vec& u_star = system_template.u_star();
  const Vec probe = options.probe_direction ? *options.probe_direction
                                            : default_probe_direction(ic, u_star);

  SweepReport report;
  report.entries.resize(a_values.size());
  parallel_for(a_values.size(), options.threads, [&](std::size_t i) {
    SweepEntry& e = report.entries[i];
    e.a = a_values[i];
    try {
      const SystemConfig s = system_template.with_damping(e.a);
      Trajectory traj = integrate_adaptive(s, ic, t_max, options.settings);
      e.regime = classify_regime(traj, u_star, probe);
      if (e.a > 0.0 && e.regime->converged) {
        try {
          e.decay = fit_decay_rate(traj, u_star, options.window_fraction);
        } catch (const std::exception&) {
          // no fit for degenerate or non-decaying runs
        }
      }
      std::optional<double> settle;
      for (std::size_t k = traj.size(); k-- > 0;) {
        if (phase_distance(traj.states[k], u_star) > options.time_tolerance) break;
        settle = traj.times[k];
      }
      e.time_to_tolerance = settle;
      e.trajectory = std::move(traj);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  });

  std::vector<std::pair<double, double>> rates;
  for (const auto& e : report.entries) {
    if (e.a > 0.0 && e.trajectory) {
      for (const auto& z : e.trajectory->states)
        report.sup_norm_damped = std::max(report.sup_norm_damped, phase_distance(z, u_star));
    }
    if (e.decay) rates.emplace_back(e.a, e.decay->gamma_fit);
  }
  if (rates.size() >= 2) {
    double sa = 0.0, sg = 0.0;
    for (const auto& [a, g] : rates) {
      sa += a;
      sg += g;
    }
    const double cnt = static_cast<double>(rates.size());
    const double a_mean = sa / cnt, g_mean = sg / cnt;
    double saa = 0.0, sag = 0.0;
    for (const auto& [a, g] : rates) {
      saa += (a - a_mean) * (a - a_mean);
      sag += (a - a_mean) * (g - g_mean);
    }
    if (saa > 0.0) {
      report.gamma_trend_slope = sag / saa;
      report.gamma_trend_intercept = g_mean - *report.gamma_trend_slope * a_mean;
    }
  }
  return report;
}

}  // namespace grad2
