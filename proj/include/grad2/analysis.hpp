#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grad2/integrators.hpp"

namespace grad2 {

// ---------------------------------------------------------------------------
// Lyapunov and energy checks

struct MonotonicityReport {
  double max_increase = 0.0;
  bool pass = true;
  std::size_t pairs_checked = 0;
};

/// Largest increase of V_a between consecutive samples. When `ball_radius` is
/// set, only pairs whose positions both lie within that distance of u* are
/// examined (the local domain on which V_a is guaranteed to decrease).
MonotonicityReport verify_lyapunov_monotonicity(const Trajectory& traj, const SystemConfig& s,
                                                double slack,
                                                std::optional<double> ball_radius = std::nullopt);

struct EnergyReport {
  double max_residual = 0.0;
};

/// max_k |E(z_k) - E(z_0) + a * integral_0^{t_k} |y|^2 dt|, trapezoid rule on
/// the sample grid.
EnergyReport verify_energy_dissipation(const Trajectory& traj, const SystemConfig& s);

// ---------------------------------------------------------------------------
// Decay fits

struct DecayFit {
  double c_fit = 0.0;
  double gamma_fit = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double rms_residual = 0.0;  // in log space
};

/// Least-squares line through (t, log(|x - u*| + |y|)) over the last
/// `window_fraction` of the samples whose norm exceeds `floor`.
/// NumericError (degenerate fit) if fewer than two samples clear the floor;
/// InputError if the trajectory does not decay.
DecayFit fit_decay_rate(const Trajectory& traj, ConstVecView u_star, double window_fraction = 0.5,
                        double floor = 1e-12);

// ---------------------------------------------------------------------------
// Damping regimes

enum class Regime { kOscillatoryNondecaying, kUnderdamped, kNonoscillatoryDecaying, kInconclusive };
std::string_view to_string(Regime r);

struct RegimeReport {
  std::size_t crossings = 0;
  bool converged = false;
  Regime classification = Regime::kInconclusive;
};

/// Counts strict sign changes of <x - u*, d> along the trajectory, ignoring
/// samples where that projection is below 1e-9 of |x - u*| + |y|. The
/// trajectory counts as converged if it ended with a `converged` event or if
/// |x - u*| + |y| over its last 10% of samples stays below
/// `decay_ratio` times its initial value.
RegimeReport classify_regime(const Trajectory& traj, ConstVecView u_star,
                             ConstVecView probe_direction, double decay_ratio = 0.5);

/// Normalised x0 - u*, or the normalised initial velocity when x0 = u*, or
/// the first unit vector for a state at rest on u*.
Vec default_probe_direction(const State& z0, ConstVecView u_star);

/// Settings used by the critical-damping search: tight relative tolerance and
/// a negligible absolute floor, so that sign changes deep in the exponential
/// tail stay resolved.
IntegratorSettings critical_search_settings();

struct CriticalDampingResult {
  double a_star = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t iterations = 0;
};

/// Bisection on a over the predicate "crossings >= 2" until the bracket is
/// no wider than tol. InputError (bracket error) if the predicate agrees at
/// both ends of a_range.
CriticalDampingResult find_critical_damping(const SystemConfig& system_template, const State& ic,
                                            double a_lo, double a_hi, double tol, double t_max,
                                            const IntegratorSettings& settings =
                                                critical_search_settings());

// ---------------------------------------------------------------------------
// Basins of attraction

struct AxisGrid {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  /// Centre of cell i; a single cell over [v, v] is the point v.
  double center(std::size_t i) const {
    return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(count);
  }
};

/// Grid over initial states: N position axes followed by N velocity axes.
struct PhaseGrid {
  std::vector<AxisGrid> axes;

  std::size_t cell_count() const;
  State cell_center(std::size_t flat_index) const;
};

struct BasinMap {
  static constexpr int kUnresolved = -1;

  PhaseGrid grid;
  EquilibriumSet equilibria;
  // Per cell (first axis fastest): index into equilibria.points, or kUnresolved.
  std::vector<int> assignment;
};

struct BasinOptions {
  IntegratorSettings settings{};
  std::size_t threads = 1;
  // Where to look for equilibria; empty means a symmetric box covering the
  // grid's position axes generously.
  Box equilibria_box;
  std::size_t equilibria_grid = 0;  // 0 picks a default per dimension
};

/// Integrates every cell centre and assigns it to the classified minimum its
/// terminal state lies within conv_tol of (phase-space distance), else
/// unresolved. InputError if a = 0 or no minimum is found.
BasinMap basin_map(const SystemConfig& s, const PhaseGrid& grid, double t_max, double conv_tol,
                   const BasinOptions& options = {});

// ---------------------------------------------------------------------------
// Conservative orbits

struct ClosedOrbitReport {
  std::optional<double> period;
  // Distance to z0 at the detected return. Without a return: the smallest
  // distance over local minima of |z(t) - z0| and the final sample.
  double return_distance = 0.0;
};

/// Leapfrog from z0 with step h; reports the first return to within tol of z0
/// after leaving the 10*tol ball, with the crossing time refined on the
/// Hermite interpolant between samples. Requires a = 0 and a non-equilibrium z0.
ClosedOrbitReport closed_orbit_check(const SystemConfig& s, const State& z0, double t_max,
                                     double tol, double h = 1e-3);

// ---------------------------------------------------------------------------
// Damping sweeps

struct SweepEntry {
  double a = 0.0;
  std::optional<Trajectory> trajectory;
  std::optional<RegimeReport> regime;
  std::optional<DecayFit> decay;
  // First sample time after which |x - u*| + |y| stays below the sweep's
  // time tolerance.
  std::optional<double> time_to_tolerance;
  std::string error;  // empty on success
};

struct SweepReport {
  std::vector<SweepEntry> entries;
  // sup over t and over entries with a > 0 of |x - u*| + |y|.
  double sup_norm_damped = 0.0;
  // Least-squares line gamma_fit ~ intercept + slope * a over fitted entries.
  std::optional<double> gamma_trend_slope;
  std::optional<double> gamma_trend_intercept;
};

struct SweepOptions {
  IntegratorSettings settings{};
  std::size_t threads = 1;
  std::optional<Vec> probe_direction;  // default: default_probe_direction(ic)
  double window_fraction = 0.5;
  double time_tolerance = 1e-3;
};

/// Runs every damping value from the same initial condition. Integrator
/// failures are recorded per entry and the sweep continues.
SweepReport damping_sweep(const SystemConfig& system_template, const State& ic,
                          const std::vector<double>& a_values, double t_max,
                          const SweepOptions& options = {});

}  // namespace grad2
