#pragma once

#include <cstddef>

#include "grad2/potentials.hpp"

namespace grad2 {

/// Phase-space point: position x = u and velocity y = du/dt.
struct State {
  Vec x;
  Vec y;

  std::size_t dimension() const { return x.size(); }
  bool operator==(const State&) const = default;
};

/// u'' + a u' + grad W(u) = 0 together with the reference equilibrium u*.
/// a = 0 selects the conservative (Hamiltonian) case.
class SystemConfig {
 public:
  /// u_star defaults to the origin. Throws InputError if a < 0, the dimensions
  /// disagree, or |grad W(u_star)| > 1e-8.
  SystemConfig(Potential potential, double a, Vec u_star = {});

  const Potential& potential() const { return potential_; }
  double a() const { return a_; }
  const Vec& u_star() const { return u_star_; }
  std::size_t dimension() const { return potential_.dimension(); }

  /// Same potential and u*, different damping.
  SystemConfig with_damping(double a) const;

 private:
  Potential potential_;
  double a_;
  Vec u_star_;
};

/// Constants of the norm equivalence m1 |z|^2 <= V_a(z) <= m2 |z|^2 and the
/// decay rate gamma with V_a(t) <= V_a(0) exp(-gamma t).
struct DecayConstants {
  double m1 = 0.0;
  double m2 = 0.0;
  double gamma = 0.0;
};

/// F_a(x, y) = (y, -a y - grad W(x)).
State vector_field(const SystemConfig& s, const State& z);

/// E = |y|^2 / 2 + W(x).
double energy(const SystemConfig& s, const State& z);

/// V_a = |y|^2 / 2 + 2 W(x) + |y + a (x - u*)|^2 / 2.
double lyapunov(const SystemConfig& s, const State& z);

/// The same functional in expanded form,
/// |y|^2 + 2 W(x) + a <x - u*, y> + (a^2 / 2) |x - u*|^2.
double lyapunov_expanded(const SystemConfig& s, const State& z);

/// Exact derivative of V_a along the flow: -a |y|^2 - a <grad W(x), x - u*>.
double lyapunov_dissipation(const SystemConfig& s, const State& z);

/// Exact derivative of E along the flow: -a |y|^2.
double energy_dissipation(const SystemConfig& s, const State& z);

/// m1 = min{1/2, 2 alpha}, m2 = max{3/2, 2 beta + a^2}, gamma = a min{1, mu} / m2.
/// Throws InputError for a = 0: the conservative case has no decay rate.
DecayConstants decay_constants(const SystemConfig& s, const LocalConstants& lc);

/// Phase-space radius R = sqrt(C_B + 2 R_B) bounding every trajectory that
/// starts with energy <= energy_bound, where C_B = sup{|x|^2 : W(x) <= R_B}
/// is located by a grid scan of `probe_box` refined by bisection across the
/// sublevel boundary. Throws InputError("probe box too small") when the
/// sublevel set reaches the box boundary, or when it is empty.
double absorbing_radius(const SystemConfig& s, double energy_bound, const Box& probe_box,
                        std::size_t grid_per_axis = 0);

}  // namespace grad2
