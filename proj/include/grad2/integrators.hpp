#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "grad2/dynamics.hpp"

namespace grad2 {

enum class Method { kRk4, kAdaptive, kLeapfrog };
enum class TerminalEvent { kConverged, kEscaped, kTMaxReached };

std::string_view to_string(Method m);
std::string_view to_string(TerminalEvent e);
/// Parses "rk4" / "adaptive" / "leapfrog"; InputError otherwise.
Method parse_method(std::string_view name);

/// Sampled solution of the first-order system. times[0] = 0 and states[0] is
/// the initial condition, bit for bit.
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  Method method = Method::kAdaptive;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  std::optional<TerminalEvent> terminal_event;

  std::size_t size() const { return times.size(); }
  const State& back() const { return states.back(); }
};

struct IntegratorSettings {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-12;
  double h_max = 0.1;
  // Output spacing; samples land on integer multiples of it (plus t_max).
  double sample_stride = 0.01;

  /// Throws InputError naming the first offending field.
  void validate() const;
};

/// One classical fourth-order Runge-Kutta step. NumericError on overflow.
State step_rk4(const SystemConfig& s, const State& z, double h);

/// One Stormer-Verlet (kick-drift-kick) step of the conservative system.
/// Requires s.a() == 0. Negative h steps backwards; the scheme is exactly
/// time-reversible up to rounding.
State step_leapfrog(const SystemConfig& s, const State& z, double h);

/// Dormand-Prince 5(4) with per-step error control against
/// abs_tol + rel_tol * |z| with samples taken from the pair's fourth-order dense output.
/// NumericError on step underflow (h < h_min) or a non-finite state.
Trajectory integrate_adaptive(const SystemConfig& s, const State& z0, double t_max,
                              const IntegratorSettings& settings = {});

/// Fixed-step RK4 or leapfrog. The step is shortened where needed so that
/// every sample time is hit exactly.
Trajectory integrate_fixed(const SystemConfig& s, const State& z0, double t_max, double h,
                           double sample_stride, Method method);

/// Predicate evaluated on every emitted sample (index, time, state); returning
/// a terminal event stops the integration after that sample.
using SampleMonitor =
    std::function<std::optional<TerminalEvent>(std::size_t, double, const State&)>;

/// integrate_adaptive with an early-exit monitor.
Trajectory integrate_adaptive_monitored(const SystemConfig& s, const State& z0, double t_max,
                                        const IntegratorSettings& settings,
                                        const SampleMonitor& monitor);

/// Adaptive integration that stops with `converged` once
/// |x - u*| + |y| <= conv_tol on 3 consecutive samples, or with `escaped` once
/// |(x - u*, y)| >= escape_radius; otherwise ends with `t_max_reached`.
Trajectory integrate_until(const SystemConfig& s, const State& z0, double t_max,
                           const IntegratorSettings& settings, double conv_tol,
                           double escape_radius);

/// Sample times 0, stride, 2 stride, ... up to t_max, closed with t_max itself.
std::vector<double> sample_grid(double t_max, double stride);

}  // namespace grad2
