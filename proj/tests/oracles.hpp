#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

// Independent reference values used by the tests. Nothing here calls into
// the library.
namespace oracle {

struct Phase1 {
  double x;
  double y;
};

// u'' + a u' + u = 0, u(0) = x0, u'(0) = y0, from the roots of l^2 + a l + 1.
inline Phase1 damped_linear(double a, double x0, double y0, double t) {
  if (a == 2.0) {
    const double e = std::exp(-t);
    const double c = y0 + x0;
    return {e * (x0 + c * t), e * (c - x0 - c * t)};
  }
  using C = std::complex<double>;
  const C disc = std::sqrt(C(a * a - 4.0, 0.0));
  const C r1 = (-a + disc) / 2.0;
  const C r2 = (-a - disc) / 2.0;
  const C c1 = (y0 - r2 * x0) / (r1 - r2);
  const C c2 = x0 - c1;
  const C e1 = std::exp(r1 * t);
  const C e2 = std::exp(r2 * t);
  return {(c1 * e1 + c2 * e2).real(), (c1 * r1 * e1 + c2 * r2 * e2).real()};
}

// Central difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Hand-written closed forms at scale 1.
inline double quadratic(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return 0.5 * s;
}
inline double double_well(double x) { return 0.25 * (x * x - 1) * (x * x - 1); }
inline double quartic_symmetric(double x) { return x * x * (x * x - 1) * (x * x - 1); }
inline double ginzburg_landau(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return 0.25 * (s - 1) * (s - 1);
}
inline double exponential(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return 0.5 * (std::exp(s) - 1);
}

inline std::vector<double> uniform_point(std::mt19937_64& rng, std::size_t n, double lo,
                                         double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

}  // namespace oracle
