#include "grad2/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grad2 {

namespace {

void check_state(const SystemConfig& s, const State& z) {
  require_dimension(z.x, s.dimension(), "state position");
  require_dimension(z.y, s.dimension(), "state velocity");
}

}  // namespace

SystemConfig::SystemConfig(Potential potential, double a, Vec u_star)
    : potential_(std::move(potential)), a_(a), u_star_(std::move(u_star)) {
  if (!(a_ >= 0.0) || !std::isfinite(a_))
    throw InputError("damping coefficient a must be a finite number >= 0, got " +
                     std::to_string(a_));
  if (u_star_.empty()) u_star_.assign(potential_.dimension(), 0.0);
  require_dimension(u_star_, potential_.dimension(), "u_star");
  const double g = norm(potential_.gradient(u_star_));
  if (!(g <= 1e-8))
    throw InputError("u_star is not an equilibrium: |grad W(u_star)| = " + std::to_string(g));
}

SystemConfig SystemConfig::with_damping(double a) const {
  return SystemConfig(potential_, a, u_star_);
}

State vector_field(const SystemConfig& s, const State& z) {
  check_state(s, z);
  const Vec g = s.potential().gradient(z.x);
  State out{z.y, Vec(z.y.size())};
  for (std::size_t i = 0; i < g.size(); ++i) out.y[i] = -s.a() * z.y[i] - g[i];
  return out;
}

double energy(const SystemConfig& s, const State& z) {
  check_state(s, z);
  return 0.5 * norm_sq(z.y) + s.potential().value(z.x);
}

double lyapunov(const SystemConfig& s, const State& z) {
  check_state(s, z);
  const Vec xi = sub(z.x, s.u_star());
  const Vec mixed = axpy(z.y, s.a(), xi);
  return 0.5 * norm_sq(z.y) + 2.0 * s.potential().value(z.x) + 0.5 * norm_sq(mixed);
}

double lyapunov_expanded(const SystemConfig& s, const State& z) {
  check_state(s, z);
  const Vec xi = sub(z.x, s.u_star());
  const double a = s.a();
  return norm_sq(z.y) + 2.0 * s.potential().value(z.x) + a * dot(xi, z.y) +
         0.5 * a * a * norm_sq(xi);
}

double lyapunov_dissipation(const SystemConfig& s, const State& z) {
  check_state(s, z);
  const Vec xi = sub(z.x, s.u_star());
  return -s.a() * norm_sq(z.y) - s.a() * dot(s.potential().gradient(z.x), xi);
}

double energy_dissipation(const SystemConfig& s, const State& z) {
  check_state(s, z);
  return -s.a() * norm_sq(z.y);
}

DecayConstants decay_constants(const SystemConfig& s, const LocalConstants& lc) {
  const double a = s.a();
  if (!(a > 0.0)) throw InputError("conservative case has no decay rate (a = 0)");
  if (!(lc.alpha > 0.0 && lc.beta >= lc.alpha && lc.mu > 0.0))
    throw InputError("local constants must satisfy 0 < alpha <= beta and mu > 0");
  DecayConstants dc;
  dc.m1 = std::min(0.5, 2.0 * lc.alpha);
  dc.m2 = std::max(1.5, 2.0 * lc.beta + a * a);
  dc.gamma = a * std::min(1.0, lc.mu) / dc.m2;
  return dc;
}

double absorbing_radius(const SystemConfig& s, double energy_bound, const Box& probe_box,
                        std::size_t grid_per_axis) {
  if (!(s.a() > 0.0)) throw InputError("absorbing radius requires a > 0");
  if (!std::isfinite(energy_bound)) throw InputError("energy_bound must be finite");
  const std::size_t n = s.dimension();
  if (probe_box.size() != n) throw InputError("probe box must have one interval per dimension");
  for (const auto& iv : probe_box)
    if (!(iv.hi > iv.lo)) throw InputError("probe box intervals must be nondegenerate");
  if (grid_per_axis == 0) {
    constexpr std::size_t kDefaults[] = {2001, 2001, 401, 81, 31};
    grid_per_axis = n < 5 ? kDefaults[n] : 11;
  }
  if (grid_per_axis < 3) throw InputError("grid_per_axis must be at least 3");

  const Potential& w = s.potential();
  const double level = energy_bound;
  const auto inside = [&](ConstVecView x) { return w.value(x) <= level; };
  // a polished critical point carries rounding noise in W
  const double point_level = energy_bound + 1e-12 * (1.0 + std::abs(energy_bound));

  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= grid_per_axis;
  const auto point_of = [&](std::size_t flat) {
    Vec x(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = flat % grid_per_axis;
      flat /= grid_per_axis;
      x[k] = probe_box[k].lo +
             static_cast<double>(i) * probe_box[k].width() / static_cast<double>(grid_per_axis - 1);
    }
    return x;
  };
  const auto axis_index = [&](std::size_t flat, std::size_t axis) {
    for (std::size_t k = 0; k < axis; ++k) flat /= grid_per_axis;
    return flat % grid_per_axis;
  };

  std::vector<double> values(total);
  for (std::size_t f = 0; f < total; ++f) values[f] = w.value(point_of(f));

  bool any_inside = false;
  double c_b = 0.0;
  std::size_t stride = 1;
  std::vector<std::size_t> strides(n);
  for (std::size_t k = 0; k < n; ++k) {
    strides[k] = stride;
    stride *= grid_per_axis;
  }

  for (std::size_t f = 0; f < total; ++f) {
    const Vec x = point_of(f);
    const bool in = values[f] <= level;
    bool local_min = true;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = axis_index(f, k);
      if (in && (i == 0 || i + 1 == grid_per_axis))
        throw InputError("probe box too small: the sublevel set {W <= " +
                         std::to_string(energy_bound) + "} reaches the box boundary");
      for (int dir : {-1, 1}) {
        if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == grid_per_axis)) {
          local_min = false;
          continue;
        }
        const std::size_t g = dir < 0 ? f - strides[k] : f + strides[k];
        if (values[g] < values[f]) local_min = false;
        if (in && values[g] > level) {
          // Bisect the grid edge for the last point inside the sublevel set.
          Vec lo = x;
          Vec hi = point_of(g);
          for (int it = 0; it < 60; ++it) {
            Vec mid = lo;
            for (std::size_t c = 0; c < n; ++c) mid[c] = 0.5 * (lo[c] + hi[c]);
            (inside(mid) ? lo : hi) = std::move(mid);
          }
          c_b = std::max(c_b, norm_sq(lo));
        }
      }
    }
    if (in) {
      any_inside = true;
      c_b = std::max(c_b, norm_sq(x));
    } else if (local_min) {
      // Thin sublevel sets (e.g. the level of the minimum itself) can fall
      // between grid nodes; polish discrete minima onto the critical point.
      if (auto m = polish_critical_point(w, x, 1e-13)) {
        bool in_box = true;
        for (std::size_t k = 0; k < n; ++k) in_box = in_box && probe_box[k].contains((*m)[k]);
        if (in_box && w.value(*m) <= point_level) {
          any_inside = true;
          c_b = std::max(c_b, norm_sq(*m));
        }
      }
    }
  }
  if (!any_inside)
    throw InputError("energy_bound " + std::to_string(energy_bound) +
                     " is below the sampled infimum of W on the probe box");
  return std::sqrt(c_b + 2.0 * energy_bound);
}

}  // namespace grad2
