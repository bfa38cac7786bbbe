#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "grad2/dynamics.hpp"
#include "grad2/errors.hpp"
#include "oracles.hpp"

using namespace grad2;

namespace {

State st(double x, double y) { return State{{x}, {y}}; }

const LocalConstants kQuadraticExact{0.5, 0.5, 1.0, 1.0};

// Random system with an equilibrium it is valid for.
SystemConfig random_system(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> ua(0.0, 4.0);
  const double a = ua(rng);
  switch (pick(rng)) {
    case 0: return SystemConfig(Potential::quadratic(2), a);
    case 1: return SystemConfig(Potential::double_well(), a, {1.0});
    case 2: return SystemConfig(Potential::exponential(1), a);
    case 3: return SystemConfig(Potential::ginzburg_landau(2), a, {0.0, 1.0});
    default: return SystemConfig(Potential::shifted(Potential::quadratic(1), {0.7}), a, {0.7});
  }
}

State random_state(std::mt19937_64& rng, std::size_t n, double r) {
  return State{oracle::uniform_point(rng, n, -r, r), oracle::uniform_point(rng, n, -r, r)};
}

State shifted_along(const State& z, const State& f, double h) {
  return State{axpy(z.x, h, f.x), axpy(z.y, h, f.y)};
}

}  // namespace

TEST(SystemConfig, Validation) {
  EXPECT_THROW(SystemConfig(Potential::quadratic(), -0.1), InputError);
  EXPECT_THROW(SystemConfig(Potential::quadratic(), NAN), InputError);
  EXPECT_THROW(SystemConfig(Potential::quadratic(), INFINITY), InputError);
  EXPECT_THROW(SystemConfig(Potential::double_well(), 0.3, {0.5}), InputError);
  EXPECT_THROW(SystemConfig(Potential::quadratic(2), 0.3, {0.0}), InputError);
  const SystemConfig s(Potential::quadratic(3), 0.0);
  EXPECT_EQ(s.u_star(), Vec(3, 0.0));
  EXPECT_EQ(s.with_damping(2.0).a(), 2.0);
  EXPECT_THROW(s.with_damping(-1.0), InputError);
}

TEST(VectorField, Examples) {
  const SystemConfig dw(Potential::double_well(), 0.3, {1.0});
  EXPECT_EQ(vector_field(dw, st(1.0, 0.0)), st(0.0, 0.0));
  EXPECT_EQ(vector_field(SystemConfig(Potential::quadratic(), 0.3), st(2.0, 0.0)), st(0.0, -2.0));
  const State f = vector_field(SystemConfig(Potential::double_well(), 0.3), st(1.5, -0.2));
  EXPECT_NEAR(f.x[0], -0.2, 1e-15);
  EXPECT_NEAR(f.y[0], -1.815, 1e-14);
  EXPECT_THROW(vector_field(dw, State{{1.0, 0.0}, {0.0}}), InputError);
  EXPECT_THROW(vector_field(dw, State{{1.0}, {}}), InputError);
}

TEST(Energy, Examples) {
  EXPECT_DOUBLE_EQ(energy(SystemConfig(Potential::quadratic(), 0.0), st(2.0, 0.0)), 2.0);
  EXPECT_DOUBLE_EQ(energy(SystemConfig(Potential::double_well(), 0.3, {-1.0}), st(-1.0, 0.0)),
                   0.0);
  EXPECT_NEAR(energy(SystemConfig(Potential::double_well(), 0.0), st(0.0, 0.72)), 0.5092, 1e-15);
}

TEST(Lyapunov, Examples) {
  const SystemConfig q(Potential::quadratic(), 1.0);
  EXPECT_DOUBLE_EQ(lyapunov(q, st(0.0, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov(q, st(1.0, 0.0)), 1.5);
  EXPECT_DOUBLE_EQ(lyapunov(q, st(0.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(lyapunov(SystemConfig(Potential::double_well(), 0.7, {1.0}), st(1.0, 0.0)),
                   0.0);
}

TEST(Lyapunov, ConservativeCaseIsTwiceEnergy) {
  const SystemConfig s(Potential::double_well(), 0.0);
  for (double x : {-1.3, 0.0, 0.4})
    EXPECT_NEAR(lyapunov(s, st(x, 0.9)), 2.0 * energy(s, st(x, 0.9)), 1e-14);
}

TEST(Dissipation, Examples) {
  const SystemConfig q(Potential::quadratic(), 1.0);
  EXPECT_EQ(lyapunov_dissipation(q, st(0.0, 0.0)), 0.0);
  EXPECT_DOUBLE_EQ(lyapunov_dissipation(q, st(1.0, 1.0)), -2.0);
  const SystemConfig c(Potential::double_well(), 0.0);
  EXPECT_EQ(lyapunov_dissipation(c, st(0.3, -2.0)), 0.0);
  EXPECT_EQ(energy_dissipation(c, st(0.3, -2.0)), 0.0);
  EXPECT_DOUBLE_EQ(energy_dissipation(q, st(5.0, 3.0)), -9.0);
}

TEST(Lyapunov, ExpandedFormAgrees) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 1000; ++k) {
    const SystemConfig s = random_system(rng);
    const State z = random_state(rng, s.dimension(), 1.5);
    const double v = lyapunov(s, z);
    const double e = lyapunov_expanded(s, z);
    EXPECT_LE(std::abs(v - e), 1e-12 * std::max(1.0, std::abs(v))) << k;
  }
}

TEST(Dissipation, MatchesFiniteDifferenceAlongFlow) {
  std::mt19937_64 rng(2);
  const double h = 1e-6;
  for (int k = 0; k < 1000; ++k) {
    const SystemConfig s = random_system(rng);
    const State z = random_state(rng, s.dimension(), 1.2);
    const State f = vector_field(s, z);
    const double fd =
        (lyapunov(s, shifted_along(z, f, h)) - lyapunov(s, shifted_along(z, f, -h))) / (2 * h);
    const double exact = lyapunov_dissipation(s, z);
    EXPECT_LE(std::abs(fd - exact), 1e-4 * (1.0 + std::abs(exact))) << k;

    const double efd =
        (energy(s, shifted_along(z, f, h)) - energy(s, shifted_along(z, f, -h))) / (2 * h);
    EXPECT_LE(std::abs(efd - energy_dissipation(s, z)), 1e-4 * (1.0 + std::abs(efd))) << k;
  }
}

TEST(Lyapunov, StrictInsideProbedBall) {
  std::mt19937_64 rng(3);
  struct Case {
    SystemConfig s;
    double radius;
  };
  const std::vector<Case> cases{{SystemConfig(Potential::quadratic(), 0.8), 1.0},
                                {SystemConfig(Potential::double_well(), 0.3, {1.0}), 0.5},
                                {SystemConfig(Potential::double_well(), 2.5, {1.0}), 0.5}};
  for (const auto& c : cases) {
    int checked = 0;
    while (checked < 1000) {
      State z = random_state(rng, 1, c.radius);
      if (std::hypot(z.x[0], z.y[0]) == 0.0 || std::abs(z.x[0]) > c.radius) continue;
      z.x[0] += c.s.u_star()[0];
      EXPECT_GT(lyapunov(c.s, z), 0.0);
      // the dissipation vanishes only where y = 0 and x = u*
      if (z.y[0] != 0.0 || z.x[0] != c.s.u_star()[0]) {
        EXPECT_LT(lyapunov_dissipation(c.s, z), 0.0);
      }
      ++checked;
    }
  }
}

TEST(DecayConstants, ExactQuadratic) {
  const auto one = decay_constants(SystemConfig(Potential::quadratic(), 1.0), kQuadraticExact);
  EXPECT_DOUBLE_EQ(one.m1, 0.5);
  EXPECT_DOUBLE_EQ(one.m2, 2.0);
  EXPECT_DOUBLE_EQ(one.gamma, 0.5);
  const auto half = decay_constants(SystemConfig(Potential::quadratic(), 0.5), kQuadraticExact);
  EXPECT_DOUBLE_EQ(half.m1, 0.5);
  EXPECT_DOUBLE_EQ(half.m2, 1.5);
  EXPECT_NEAR(half.gamma, 1.0 / 3.0, 1e-15);
  const auto two = decay_constants(SystemConfig(Potential::quadratic(), 2.0), kQuadraticExact);
  EXPECT_DOUBLE_EQ(two.m2, 5.0);
  EXPECT_DOUBLE_EQ(two.gamma, 0.4);
  EXPECT_THROW(decay_constants(SystemConfig(Potential::quadratic(), 0.0), kQuadraticExact),
               InputError);
}

TEST(DecayConstants, SmallAlphaAndMu) {
  const auto dc = decay_constants(SystemConfig(Potential::quadratic(), 1.0),
                                  LocalConstants{0.1, 2.0, 0.3, 1.0});
  EXPECT_DOUBLE_EQ(dc.m1, 0.2);
  EXPECT_DOUBLE_EQ(dc.m2, 5.0);
  EXPECT_DOUBLE_EQ(dc.gamma, 0.3 / 5.0);
  EXPECT_LE(dc.m1, dc.m2);
}

TEST(NormEquivalence, ExactQuadratic) {
  std::mt19937_64 rng(4);
  for (double a : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    const SystemConfig s(Potential::quadratic(2), a);
    const DecayConstants dc = decay_constants(s, kQuadraticExact);
    for (int k = 0; k < 1000; ++k) {
      const State z = random_state(rng, 2, 3.0);
      const double r2 = norm_sq(z.x) + norm_sq(z.y);
      const double v = lyapunov(s, z);
      EXPECT_LE(dc.m1 * r2, v * (1 + 1e-14));
      EXPECT_LE(v, dc.m2 * r2 * (1 + 1e-14));
    }
  }
}

TEST(AbsorbingRadius, Examples) {
  const SystemConfig q(Potential::quadratic(), 1.0);
  EXPECT_NEAR(absorbing_radius(q, 2.0, Box{Interval{-3.0, 3.0}}), std::sqrt(8.0), 1e-9);
  const SystemConfig dw(Potential::double_well(), 0.3, {1.0});
  EXPECT_NEAR(absorbing_radius(dw, 0.0, Box{Interval{-2.0, 2.0}}), 1.0, 1e-9);
  EXPECT_THROW(absorbing_radius(q, 2.0, Box{Interval{-1.0, 1.0}}), InputError);
}

TEST(AbsorbingRadius, TwoDimensionsAndErrors) {
  const SystemConfig q(Potential::quadratic(2), 0.5);
  EXPECT_NEAR(absorbing_radius(q, 1.0, Box{Interval{-2, 2}, Interval{-2, 2}}), 2.0, 1e-6);
  EXPECT_THROW(absorbing_radius(q.with_damping(0.0), 1.0, Box{Interval{-2, 2}, Interval{-2, 2}}),
               InputError);
  // empty sublevel set
  EXPECT_THROW(absorbing_radius(q, -1.0, Box{Interval{-2, 2}, Interval{-2, 2}}), InputError);
  EXPECT_THROW(absorbing_radius(q, 1.0, Box{Interval{-2, 2}}), InputError);
}
