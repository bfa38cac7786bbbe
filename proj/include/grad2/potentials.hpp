#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grad2/vec.hpp"

namespace grad2 {

enum class PotentialKind {
  kQuadratic,         // (scale/2) |x|^2
  kDoubleWell,        // (scale/4) (x^2 - 1)^2, N = 1
  kQuarticSymmetric,  // scale * x^2 (x^2 - 1)^2, N = 1
  kGinzburgLandau,    // (scale/4) (|x|^2 - 1)^2
  kExponential,       // (scale/2) (exp(|x|^2) - 1)
  kShifted,           // inner(x - shift)
};

std::string_view to_string(PotentialKind kind);

/// Smooth potential W on R^N.
///
/// Immutable value type: copies share the (immutable) inner potential of a
/// shifted kind, so instances can be handed to concurrent workers freely.
/// Every built-in kind accepts a positive multiplicative `scale` parameter
/// (default 1); the documented closed forms are for scale = 1.
class Potential {
 public:
  static Potential quadratic(std::size_t dimension = 1, double scale = 1.0);
  static Potential double_well(double scale = 1.0);
  static Potential quartic_symmetric(double scale = 1.0);
  static Potential ginzburg_landau(std::size_t dimension = 1, double scale = 1.0);
  static Potential exponential(std::size_t dimension = 1, double scale = 1.0);
  static Potential shifted(const Potential& inner, Vec shift);

  /// Builds a kind by its configuration name ("quadratic", "double_well",
  /// "quartic_symmetric", "ginzburg_landau", "exponential"). Recognised
  /// params: "scale". Unknown names or params raise InputError.
  static Potential from_name(std::string_view name, std::size_t dimension,
                             const std::map<std::string, double>& params = {});

  PotentialKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  double scale() const { return scale_; }
  const Potential* inner() const { return inner_.get(); }
  const Vec& shift() const { return shift_; }

  double value(ConstVecView x) const;
  Vec gradient(ConstVecView x) const;

  /// A global minimiser when one is known in closed form (none for the
  /// Ginzburg-Landau sphere or the two-well kinds, where it is not unique).
  std::optional<Vec> known_minimizer() const;

  /// W(-x) = W(x) about the origin (true for every unshifted built-in kind).
  bool is_even() const { return kind_ != PotentialKind::kShifted; }

 private:
  Potential(PotentialKind kind, std::size_t dimension, double scale);

  double value_unchecked(ConstVecView x) const;
  void gradient_unchecked(ConstVecView x, std::span<double> out) const;

  PotentialKind kind_;
  std::size_t dimension_;
  double scale_ = 1.0;
  std::shared_ptr<const Potential> inner_;
  Vec shift_;
};

// Free-function spellings used throughout the library.
double evaluate(const Potential& p, ConstVecView x);
Vec gradient(const Potential& p, ConstVecView x);

// ---------------------------------------------------------------------------
// Hypothesis probes

/// Quadratic-control constants of W near u*, sampled on a ball of `radius`:
///   alpha |x-u*|^2 <= W(x) - W(u*) <= beta |x-u*|^2,
///   <grad W(x), x-u*> >= mu |x-u*|^2.
struct LocalConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double radius = 0.0;
};

/// Shell-sampled estimate of LocalConstants, with a 1% margin applied toward
/// the conservative side (alpha and mu shrink, beta grows).
/// Throws InputError if u_star is not critical (|grad W| > 1e-8) or the
/// arguments are invalid; HypothesisViolation if any sampled ratio is <= 0.
LocalConstants estimate_local_constants(const Potential& p, ConstVecView u_star,
                                        double radius, std::size_t sample_count,
                                        std::uint64_t seed);

enum class CoercivityVerdict { kConsistent, kInconclusive };
std::string_view to_string(CoercivityVerdict v);

struct CoercivityReport {
  std::vector<double> radii;
  std::vector<double> sphere_minima;
  CoercivityVerdict verdict = CoercivityVerdict::kInconclusive;
};

/// Minimum of W over sampled directions on spheres of growing radius. The
/// verdict is "consistent" iff the minima strictly increase over the last
/// three radii and the last minimum exceeds the first by `growth_factor`.
/// This is sampled evidence, never a proof of coercivity.
CoercivityReport probe_coercivity(const Potential& p, const std::vector<double>& radii,
                                  std::size_t directions_per_radius,
                                  double growth_factor = 10.0);

enum class CriticalPointType { kMinimum, kSaddleOrMaximum, kUnresolved };
std::string_view to_string(CriticalPointType t);

struct EquilibriumSet {
  std::vector<Vec> points;
  std::vector<CriticalPointType> classifications;
  bool continuum_suspected = false;
  // Diagnostic when nothing converged or a continuum was detected.
  std::string note;

  std::size_t size() const { return points.size(); }
  std::vector<std::size_t> minima() const;
};

struct EquilibriumSearchOptions {
  std::size_t max_iterations = 200;
  // More than this many non-mergeable critical points sharing one W value
  // raises the continuum flag.
  std::size_t continuum_count = 8;
};

/// Seeds a uniform grid over `box`, polishes every seed with damped Newton on
/// grad W (finite-difference Hessian; gradient descent on |grad W|^2 as the
/// fallback), merges converged points within 10*tol and classifies each by
/// sampling W on a small sphere. Points are returned in lexicographic order.
EquilibriumSet find_equilibria(const Potential& p, const Box& box, std::size_t grid_per_axis,
                               double tol, const EquilibriumSearchOptions& options = {});

/// Polishes a single starting point to a critical point. Returns nullopt when
/// the iteration does not reach |grad W| <= tol.
std::optional<Vec> polish_critical_point(const Potential& p, Vec start, double tol,
                                         std::size_t max_iterations = 200);

}  // namespace grad2
