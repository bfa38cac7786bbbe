#include "grad2/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grad2 {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kRk4: return "rk4";
    case Method::kAdaptive: return "adaptive";
    case Method::kLeapfrog: return "leapfrog";
  }
  return "adaptive";
}

std::string_view to_string(TerminalEvent e) {
  switch (e) {
    case TerminalEvent::kConverged: return "converged";
    case TerminalEvent::kEscaped: return "escaped";
    case TerminalEvent::kTMaxReached: return "t_max_reached";
  }
  return "t_max_reached";
}

Method parse_method(std::string_view name) {
  if (name == "rk4") return Method::kRk4;
  if (name == "adaptive") return Method::kAdaptive;
  if (name == "leapfrog") return Method::kLeapfrog;
  throw InputError("unknown method '" + std::string(name) + "' (expected adaptive, rk4 or leapfrog)");
}

void IntegratorSettings::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InputError(std::string(name) + " must be a positive finite number");
  };
  positive(rel_tol, "rel_tol");
  positive(abs_tol, "abs_tol");
  positive(h_init, "h_init");
  positive(h_min, "h_min");
  positive(h_max, "h_max");
  positive(sample_stride, "sample_stride");
  if (!(h_min <= h_init && h_init <= h_max))
    throw InputError("step sizes must satisfy h_min <= h_init <= h_max");
}

std::vector<double> sample_grid(double t_max, double stride) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InputError("t_max must be positive");
  if (!(stride > 0.0) || !std::isfinite(stride)) throw InputError("stride must be positive");
  const auto count = static_cast<std::size_t>(std::floor(t_max / stride + 1e-9));
  std::vector<double> times;
  times.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) times.push_back(static_cast<double>(k) * stride);
  const double slack = 1e-9 * std::max(1.0, t_max);
  if (times.size() > 1 && std::abs(times.back() - t_max) <= slack) {
    times.back() = t_max;
  } else {
    times.push_back(t_max);
  }
  return times;
}

namespace {

// Flat phase vector [x; y] of length 2N.
using Phase = Vec;

Phase flatten(const State& z) {
  Phase p(z.x);
  p.insert(p.end(), z.y.begin(), z.y.end());
  return p;
}

State unflatten(const Phase& p) {
  const auto n = static_cast<std::ptrdiff_t>(p.size() / 2);
  return State{Vec(p.begin(), p.begin() + n), Vec(p.begin() + n, p.end())};
}

void rhs(const SystemConfig& s, const Phase& z, Phase& out) {
  const std::size_t n = s.dimension();
  const Vec g = s.potential().gradient(ConstVecView(z.data(), n));
  out.resize(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = z[n + i];
    out[n + i] = -s.a() * z[n + i] - g[i];
  }
}

void check_initial(const SystemConfig& s, const State& z0) {
  require_dimension(z0.x, s.dimension(), "initial position");
  require_dimension(z0.y, s.dimension(), "initial velocity");
  if (!all_finite(z0.x) || !all_finite(z0.y)) throw InputError("initial condition must be finite");
}

Phase rk4_flat(const SystemConfig& s, const Phase& z, double h) {
  const std::size_t m = z.size();
  Phase k1, k2, k3, k4, tmp(m);
  rhs(s, z, k1);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
  rhs(s, tmp, k2);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
  rhs(s, tmp, k3);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + h * k3[i];
  rhs(s, tmp, k4);
  Phase out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (!all_finite(out)) throw NumericError("overflow: non-finite state in RK4 step");
  return out;
}

Phase leapfrog_flat(const SystemConfig& s, const Phase& z, double h) {
  const std::size_t n = s.dimension();
  const Potential& w = s.potential();
  Phase out(z);
  Vec g = w.gradient(ConstVecView(out.data(), n));
  for (std::size_t i = 0; i < n; ++i) out[n + i] -= 0.5 * h * g[i];
  for (std::size_t i = 0; i < n; ++i) out[i] += h * out[n + i];
  g = w.gradient(ConstVecView(out.data(), n));
  for (std::size_t i = 0; i < n; ++i) out[n + i] -= 0.5 * h * g[i];
  if (!all_finite(out)) throw NumericError("overflow: non-finite state in leapfrog step");
  return out;
}

void require_conservative(const SystemConfig& s) {
  if (s.a() != 0.0) throw InputError("leapfrog requires the conservative case (a = 0)");
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b (order 5) minus b-hat (order 4)
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;

// Fourth-order continuous extension of the Dormand-Prince pair.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct DenseStep {
  const Phase& z0;
  const Phase& z1;
  const Phase& k1;
  const Phase& k3;
  const Phase& k4;
  const Phase& k5;
  const Phase& k6;
  const Phase& k7;
  double h;

  Phase at(double theta) const {
    const double theta1 = 1.0 - theta;
    Phase out(z0.size());
    for (std::size_t i = 0; i < z0.size(); ++i) {
      const double diff = z1[i] - z0[i];
      const double bspl = h * k1[i] - diff;
      const double r4 = diff - h * k7[i] - bspl;
      const double r5 =
          h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      out[i] = z0[i] + theta * (diff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
    }
    return out;
  }
};

}  // namespace

State step_rk4(const SystemConfig& s, const State& z, double h) {
  check_initial(s, z);
  if (!(h > 0.0)) throw InputError("step size h must be positive");
  return unflatten(rk4_flat(s, flatten(z), h));
}

State step_leapfrog(const SystemConfig& s, const State& z, double h) {
  require_conservative(s);
  check_initial(s, z);
  if (!(h != 0.0) || !std::isfinite(h)) throw InputError("step size h must be nonzero");
  return unflatten(leapfrog_flat(s, flatten(z), h));
}

Trajectory integrate_adaptive_monitored(const SystemConfig& s, const State& z0, double t_max,
                                        const IntegratorSettings& settings,
                                        const SampleMonitor& monitor) {
  check_initial(s, z0);
  settings.validate();
  const std::vector<double> grid = sample_grid(t_max, settings.sample_stride);

  Trajectory traj;
  traj.method = Method::kAdaptive;
  std::optional<TerminalEvent> pending;
  bool stopped = false;
  const auto emit = [&](double t, State z) {
    const std::size_t index = traj.times.size();
    traj.times.push_back(t);
    traj.states.push_back(std::move(z));
    if (monitor && !pending) pending = monitor(index, t, traj.states.back());
    // Events are honoured from the second sample on so that every trajectory
    // has at least two samples.
    if (pending && traj.times.size() >= 2) {
      traj.terminal_event = pending;
      stopped = true;
    }
  };

  emit(0.0, z0);
  std::size_t next = 1;

  const std::size_t m = 2 * s.dimension();
  Phase z = flatten(z0);
  Phase k1, k2, k3, k4, k5, k6, k7, tmp(m), z5(m);
  rhs(s, z, k1);
  double t = 0.0;
  double h = settings.h_init;

  while (!stopped && next < grid.size()) {
    const double remaining = t_max - t;
    const bool last = h >= remaining;
    const double step = last ? remaining : h;

    for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + step * a21 * k1[i];
    rhs(s, tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = z[i] + step * (a31 * k1[i] + a32 * k2[i]);
    rhs(s, tmp, k3);
    for (std::size_t i = 0; i < m; ++i)
      tmp[i] = z[i] + step * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(s, tmp, k4);
    for (std::size_t i = 0; i < m; ++i)
      tmp[i] = z[i] + step * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(s, tmp, k5);
    for (std::size_t i = 0; i < m; ++i)
      tmp[i] = z[i] + step * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(s, tmp, k6);
    for (std::size_t i = 0; i < m; ++i)
      z5[i] = z[i] + step * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(s, z5, k7);

    double err = 0.0;
    bool finite = all_finite(z5) && all_finite(k7);
    if (finite) {
      const double sc = settings.abs_tol + settings.rel_tol * std::max(norm(z), norm(z5));
      for (std::size_t i = 0; i < m; ++i) {
        const double e = step * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                 e6 * k6[i] + e7 * k7[i]);
        err = std::max(err, std::abs(e) / sc);
      }
      finite = std::isfinite(err);
    }

    if (finite && err <= 1.0) {
      const double t_new = last ? t_max : t + step;
      while (!stopped && next < grid.size() && grid[next] <= t_new) {
        if (grid[next] == t_new) {
          emit(grid[next], unflatten(z5));
        } else {
          const double theta = (grid[next] - t) / step;
          emit(grid[next], unflatten(DenseStep{z, z5, k1, k3, k4, k5, k6, k7, step}.at(theta)));
        }
        ++next;
      }
      ++traj.steps_accepted;
      t = t_new;
      z = z5;
      k1 = k7;
      const double fac =
          err == 0.0 ? kFacMax : std::clamp(kSafety * std::pow(err, -0.2), kFacMin, kFacMax);
      // A clipped final step says nothing about the controller's choice.
      h = std::min(settings.h_max, (last ? std::max(h, step) : step) * fac);
    } else {
      ++traj.steps_rejected;
      const double fac = finite ? std::max(kFacMin, kSafety * std::pow(err, -0.2)) : kFacMin;
      h = step * fac;
      if (h < settings.h_min) {
        if (!finite) throw NumericError("overflow: non-finite state at t = " + std::to_string(t));
        throw NumericError("step size underflow (stiffness suspected) at t = " + std::to_string(t));
      }
    }
  }
  if (!traj.terminal_event) traj.terminal_event = TerminalEvent::kTMaxReached;
  return traj;
}

Trajectory integrate_adaptive(const SystemConfig& s, const State& z0, double t_max,
                              const IntegratorSettings& settings) {
  return integrate_adaptive_monitored(s, z0, t_max, settings, nullptr);
}

Trajectory integrate_until(const SystemConfig& s, const State& z0, double t_max,
                           const IntegratorSettings& settings, double conv_tol,
                           double escape_radius) {
  if (!(conv_tol > 0.0)) throw InputError("conv_tol must be positive");
  if (!(escape_radius > conv_tol)) throw InputError("escape_radius must exceed conv_tol");
  std::size_t consecutive = 0;
  const Vec& u_star = s.u_star();
  auto monitor = [&](std::size_t, double, const State& z) -> std::optional<TerminalEvent> {
    const Vec xi = sub(z.x, u_star);
    const double dist = norm(xi) + norm(z.y);
    if (std::sqrt(norm_sq(xi) + norm_sq(z.y)) >= escape_radius) return TerminalEvent::kEscaped;
    consecutive = dist <= conv_tol ? consecutive + 1 : 0;
    if (consecutive >= 3) return TerminalEvent::kConverged;
    return std::nullopt;
  };
  return integrate_adaptive_monitored(s, z0, t_max, settings, monitor);
}

Trajectory integrate_fixed(const SystemConfig& s, const State& z0, double t_max, double h,
                           double sample_stride, Method method) {
  check_initial(s, z0);
  if (!(h > 0.0) || !std::isfinite(h)) throw InputError("step size h must be positive");
  if (method == Method::kAdaptive) throw InputError("integrate_fixed needs rk4 or leapfrog");
  if (method == Method::kLeapfrog) require_conservative(s);
  const std::vector<double> grid = sample_grid(t_max, sample_stride);

  Trajectory traj;
  traj.method = method;
  traj.times.push_back(0.0);
  traj.states.push_back(z0);
  Phase z = flatten(z0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double span = grid[k] - grid[k - 1];
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / h - 1e-9)));
    const double dt = span / static_cast<double>(steps);
    for (std::size_t j = 0; j < steps; ++j)
      z = method == Method::kRk4 ? rk4_flat(s, z, dt) : leapfrog_flat(s, z, dt);
    traj.steps_accepted += steps;
    traj.times.push_back(grid[k]);
    traj.states.push_back(unflatten(z));
  }
  traj.terminal_event = TerminalEvent::kTMaxReached;
  return traj;
}

}  // namespace grad2
