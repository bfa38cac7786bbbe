#include "grad2/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "linalg.hpp"

namespace grad2 {

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::kQuadratic: return "quadratic";
    case PotentialKind::kDoubleWell: return "double_well";
    case PotentialKind::kQuarticSymmetric: return "quartic_symmetric";
    case PotentialKind::kGinzburgLandau: return "ginzburg_landau";
    case PotentialKind::kExponential: return "exponential";
    case PotentialKind::kShifted: return "shifted";
  }
  return "unknown";
}

Potential::Potential(PotentialKind kind, std::size_t dimension, double scale)
    : kind_(kind), dimension_(dimension), scale_(scale) {
  if (dimension == 0) throw InputError("potential dimension must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InputError("potential scale must be a positive finite number");
}

Potential Potential::quadratic(std::size_t dimension, double scale) {
  return Potential(PotentialKind::kQuadratic, dimension, scale);
}

Potential Potential::double_well(double scale) {
  return Potential(PotentialKind::kDoubleWell, 1, scale);
}

Potential Potential::quartic_symmetric(double scale) {
  return Potential(PotentialKind::kQuarticSymmetric, 1, scale);
}

Potential Potential::ginzburg_landau(std::size_t dimension, double scale) {
  return Potential(PotentialKind::kGinzburgLandau, dimension, scale);
}

Potential Potential::exponential(std::size_t dimension, double scale) {
  return Potential(PotentialKind::kExponential, dimension, scale);
}

Potential Potential::shifted(const Potential& inner, Vec shift) {
  require_dimension(shift, inner.dimension(), "shift");
  if (!all_finite(shift)) throw InputError("shift must be finite");
  Potential p(PotentialKind::kShifted, inner.dimension(), 1.0);
  p.inner_ = std::make_shared<const Potential>(inner);
  p.shift_ = std::move(shift);
  return p;
}

Potential Potential::from_name(std::string_view name, std::size_t dimension,
                               const std::map<std::string, double>& params) {
  double scale = 1.0;
  for (const auto& [key, value] : params) {
    if (key == "scale") {
      scale = value;
    } else {
      throw InputError("unknown potential parameter '" + key + "' for kind '" +
                       std::string(name) + "'");
    }
  }
  auto require_1d = [&] {
    if (dimension != 1)
      throw InputError("potential '" + std::string(name) + "' is only defined for dimension 1");
  };
  if (name == "quadratic") return quadratic(dimension, scale);
  if (name == "double_well") {
    require_1d();
    return double_well(scale);
  }
  if (name == "quartic_symmetric") {
    require_1d();
    return quartic_symmetric(scale);
  }
  if (name == "ginzburg_landau") return ginzburg_landau(dimension, scale);
  if (name == "exponential") return exponential(dimension, scale);
  throw InputError("unknown potential kind '" + std::string(name) + "'");
}

double Potential::value(ConstVecView x) const {
  require_dimension(x, dimension_, "potential argument");
  return value_unchecked(x);
}

Vec Potential::gradient(ConstVecView x) const {
  require_dimension(x, dimension_, "potential argument");
  Vec g(dimension_);
  gradient_unchecked(x, g);
  return g;
}

double Potential::value_unchecked(ConstVecView x) const {
  switch (kind_) {
    case PotentialKind::kQuadratic:
      return 0.5 * scale_ * norm_sq(x);
    case PotentialKind::kDoubleWell: {
      const double d = x[0] * x[0] - 1.0;
      return 0.25 * scale_ * d * d;
    }
    case PotentialKind::kQuarticSymmetric: {
      const double u2 = x[0] * x[0];
      const double d = u2 - 1.0;
      return scale_ * u2 * d * d;
    }
    case PotentialKind::kGinzburgLandau: {
      const double d = norm_sq(x) - 1.0;
      return 0.25 * scale_ * d * d;
    }
    case PotentialKind::kExponential:
      return 0.5 * scale_ * std::expm1(norm_sq(x));
    case PotentialKind::kShifted: {
      const Vec local = sub(x, shift_);
      return inner_->value_unchecked(local);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void Potential::gradient_unchecked(ConstVecView x, std::span<double> out) const {
  switch (kind_) {
    case PotentialKind::kQuadratic:
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale_ * x[i];
      return;
    case PotentialKind::kDoubleWell:
      out[0] = scale_ * x[0] * (x[0] * x[0] - 1.0);
      return;
    case PotentialKind::kQuarticSymmetric: {
      // d/du u^2 (u^2-1)^2 = 2u (u^2-1)(3u^2-1)
      const double u2 = x[0] * x[0];
      out[0] = scale_ * 2.0 * x[0] * (u2 - 1.0) * (3.0 * u2 - 1.0);
      return;
    }
    case PotentialKind::kGinzburgLandau: {
      const double f = scale_ * (norm_sq(x) - 1.0);
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i];
      return;
    }
    case PotentialKind::kExponential: {
      const double f = scale_ * std::exp(norm_sq(x));
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i];
      return;
    }
    case PotentialKind::kShifted: {
      const Vec local = sub(x, shift_);
      inner_->gradient_unchecked(local, out);
      return;
    }
  }
}

std::optional<Vec> Potential::known_minimizer() const {
  switch (kind_) {
    case PotentialKind::kQuadratic:
    case PotentialKind::kExponential:
      return Vec(dimension_, 0.0);
    case PotentialKind::kShifted: {
      auto m = inner_->known_minimizer();
      if (!m) return std::nullopt;
      return add(*m, shift_);
    }
    default:
      return std::nullopt;
  }
}

double evaluate(const Potential& p, ConstVecView x) { return p.value(x); }
Vec gradient(const Potential& p, ConstVecView x) { return p.gradient(x); }

// ---------------------------------------------------------------------------

namespace {

constexpr double kCriticalTolerance = 1e-8;
constexpr double kMargin = 0.01;

Vec random_unit(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec d(n);
  double len = 0.0;
  do {
    for (auto& v : d) v = normal(rng);
    len = norm(d);
  } while (len < 1e-12);
  for (auto& v : d) v /= len;
  return d;
}

// Axis directions (both signs) followed by `extra` seeded random directions;
// in one dimension the sphere is just {-1, +1}.
std::vector<Vec> sphere_directions(std::size_t n, std::size_t extra, std::uint64_t seed) {
  std::vector<Vec> dirs;
  for (std::size_t i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec d(n, 0.0);
      d[i] = sign;
      dirs.push_back(std::move(d));
    }
  }
  if (n > 1) {
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < extra; ++k) dirs.push_back(random_unit(n, rng));
  }
  return dirs;
}

}  // namespace

LocalConstants estimate_local_constants(const Potential& p, ConstVecView u_star, double radius,
                                        std::size_t sample_count, std::uint64_t seed) {
  require_dimension(u_star, p.dimension(), "u_star");
  if (!(radius > 0.0)) throw InputError("radius must be positive");
  if (sample_count == 0) throw InputError("sample_count must be positive");
  const double grad_norm = norm(p.gradient(u_star));
  if (!(grad_norm <= kCriticalTolerance))
    throw InputError("u_star is not a critical point: |grad W(u_star)| = " +
                     std::to_string(grad_norm));

  const std::size_t n = p.dimension();
  const std::size_t shells = std::min<std::size_t>(10, sample_count);
  const double w_star = p.value(u_star);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);

  double w_min = std::numeric_limits<double>::infinity();
  double w_max = -std::numeric_limits<double>::infinity();
  double mu_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < sample_count; ++k) {
    const double r = radius * static_cast<double>(k % shells + 1) / static_cast<double>(shells);
    Vec dir;
    if (n == 1) {
      dir = {coin(rng) ? 1.0 : -1.0};
    } else {
      dir = random_unit(n, rng);
    }
    const Vec x = axpy(u_star, r, dir);
    const Vec disp = sub(x, u_star);
    const double r2 = norm_sq(disp);
    if (r2 == 0.0) continue;
    const double w_ratio = (p.value(x) - w_star) / r2;
    const double mu_ratio = dot(p.gradient(x), disp) / r2;
    if (!(w_ratio > 0.0) || !(mu_ratio > 0.0)) {
      throw HypothesisViolation(
          "quadratic control fails on the ball of radius " + std::to_string(radius) +
          ": sampled W-ratio " + std::to_string(w_ratio) + ", gradient ratio " +
          std::to_string(mu_ratio) + " at distance " + std::to_string(std::sqrt(r2)));
    }
    w_min = std::min(w_min, w_ratio);
    w_max = std::max(w_max, w_ratio);
    mu_min = std::min(mu_min, mu_ratio);
  }
  return LocalConstants{.alpha = w_min * (1.0 - kMargin),
                        .beta = w_max * (1.0 + kMargin),
                        .mu = mu_min * (1.0 - kMargin),
                        .radius = radius};
}

std::string_view to_string(CoercivityVerdict v) {
  return v == CoercivityVerdict::kConsistent ? "consistent with coercive" : "inconclusive";
}

CoercivityReport probe_coercivity(const Potential& p, const std::vector<double>& radii,
                                  std::size_t directions_per_radius, double growth_factor) {
  if (radii.empty()) throw InputError("radii must be non-empty");
  if (directions_per_radius == 0) throw InputError("directions_per_radius must be positive");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw InputError("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InputError("radii must be strictly ascending");
  }
  const std::size_t n = p.dimension();
  const auto dirs = sphere_directions(n, directions_per_radius, 0xC0E4C1ULL);

  CoercivityReport report;
  report.radii = radii;
  for (double r : radii) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : dirs) {
      Vec x(n);
      for (std::size_t i = 0; i < n; ++i) x[i] = r * d[i];
      m = std::min(m, p.value(x));
    }
    report.sphere_minima.push_back(m);
  }

  const auto& mins = report.sphere_minima;
  const std::size_t tail = std::min<std::size_t>(3, mins.size());
  bool increasing = true;
  for (std::size_t i = mins.size() - tail + 1; i < mins.size(); ++i)
    increasing = increasing && mins[i] > mins[i - 1];
  const double first = mins.front();
  const double last = mins.back();
  const bool grew = std::isfinite(last) && last > first + (growth_factor - 1.0) * std::abs(first);
  report.verdict = (increasing && grew && mins.size() >= 2) ? CoercivityVerdict::kConsistent
                                                             : CoercivityVerdict::kInconclusive;
  return report;
}

std::string_view to_string(CriticalPointType t) {
  switch (t) {
    case CriticalPointType::kMinimum: return "minimum";
    case CriticalPointType::kSaddleOrMaximum: return "saddle-or-maximum";
    case CriticalPointType::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

std::vector<std::size_t> EquilibriumSet::minima() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < classifications.size(); ++i)
    if (classifications[i] == CriticalPointType::kMinimum) idx.push_back(i);
  return idx;
}

namespace {

// Central-difference Jacobian of the gradient.
Matrix fd_hessian(const Potential& p, const Vec& x) {
  const std::size_t n = x.size();
  Matrix h(n, n);
  Vec xp = x;
  Vec xm = x;
  for (std::size_t j = 0; j < n; ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    const Vec gp = p.gradient(xp);
    const Vec gm = p.gradient(xm);
    for (std::size_t i = 0; i < n; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  // symmetrise
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = s;
      h(j, i) = s;
    }
  return h;
}

CriticalPointType classify(const Potential& p, const Vec& point, double tol) {
  const double rho = std::max(1e-3, 1e3 * tol);
  const double w0 = p.value(point);
  const double eps = 1e-14 * (1.0 + std::abs(w0));
  bool all_above = true;
  bool any_below = false;
  for (const auto& d : sphere_directions(point.size(), 16, 0x5A3D1EULL)) {
    const double diff = p.value(axpy(point, rho, d)) - w0;
    all_above = all_above && diff > 0.0;
    any_below = any_below || diff < -eps;
  }
  if (all_above) return CriticalPointType::kMinimum;
  if (any_below) return CriticalPointType::kSaddleOrMaximum;
  return CriticalPointType::kUnresolved;
}

}  // namespace

std::optional<Vec> polish_critical_point(const Potential& p, Vec x, double tol,
                                         std::size_t max_iterations) {
  Vec g = p.gradient(x);
  double gnorm = norm(g);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if (!std::isfinite(gnorm)) return std::nullopt;
    if (gnorm <= tol) return x;

    const Matrix h = fd_hessian(p, x);
    bool moved = false;
    if (auto newton = solve(h, g)) {
      for (double t = 1.0; t > 1e-10; t *= 0.5) {
        Vec trial = axpy(x, -t, *newton);
        Vec g_trial = p.gradient(trial);
        const double n_trial = norm(g_trial);
        if (std::isfinite(n_trial) && n_trial < gnorm) {
          x = std::move(trial);
          g = std::move(g_trial);
          gnorm = n_trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) {
      // Gradient descent on phi = |grad W|^2 / 2, whose gradient is H g.
      const Vec descent = h.multiply(g);
      const double slope = norm_sq(descent);
      if (!(slope > 0.0)) return std::nullopt;
      const double phi = 0.5 * gnorm * gnorm;
      for (double t = 1.0; t > 1e-14; t *= 0.5) {
        Vec trial = axpy(x, -t, descent);
        Vec g_trial = p.gradient(trial);
        const double n_trial = norm(g_trial);
        if (std::isfinite(n_trial) && 0.5 * n_trial * n_trial <= phi - 1e-4 * t * slope) {
          x = std::move(trial);
          g = std::move(g_trial);
          gnorm = n_trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) return gnorm <= tol ? std::optional<Vec>(x) : std::nullopt;
  }
  return gnorm <= tol ? std::optional<Vec>(x) : std::nullopt;
}

EquilibriumSet find_equilibria(const Potential& p, const Box& box, std::size_t grid_per_axis,
                               double tol, const EquilibriumSearchOptions& options) {
  const std::size_t n = p.dimension();
  if (box.size() != n) throw InputError("box must have one interval per dimension");
  for (const auto& iv : box)
    if (!(iv.hi > iv.lo)) throw InputError("box intervals must be nondegenerate");
  if (!(tol > 0.0)) throw InputError("tol must be positive");
  if (grid_per_axis == 0) throw InputError("grid_per_axis must be positive");

  const double merge_radius = 10.0 * tol;
  std::vector<Vec> reps;
  std::vector<double> rep_grad;

  std::vector<std::size_t> index(n, 0);
  const auto coord = [&](std::size_t axis, std::size_t i) {
    if (grid_per_axis == 1) return 0.5 * (box[axis].lo + box[axis].hi);
    return box[axis].lo + static_cast<double>(i) * box[axis].width() /
                              static_cast<double>(grid_per_axis - 1);
  };
  while (true) {
    Vec seed(n);
    for (std::size_t k = 0; k < n; ++k) seed[k] = coord(k, index[k]);
    if (auto pt = polish_critical_point(p, seed, tol, options.max_iterations)) {
      bool inside = true;
      for (std::size_t k = 0; k < n; ++k) inside = inside && box[k].contains((*pt)[k]);
      if (inside) {
        const double gn = norm(p.gradient(*pt));
        bool merged = false;
        for (std::size_t r = 0; r < reps.size(); ++r) {
          if (norm(sub(reps[r], *pt)) <= merge_radius) {
            if (gn < rep_grad[r]) {
              reps[r] = *pt;
              rep_grad[r] = gn;
            }
            merged = true;
            break;
          }
        }
        if (!merged) {
          reps.push_back(*pt);
          rep_grad.push_back(gn);
        }
      }
    }
    std::size_t k = 0;
    while (k < n && ++index[k] == grid_per_axis) index[k++] = 0;
    if (k == n) break;
  }

  std::sort(reps.begin(), reps.end());
  EquilibriumSet out;
  out.points = reps;
  for (const auto& pt : out.points) out.classifications.push_back(classify(p, pt, tol));
  if (out.points.empty()) {
    out.note = "unresolved: no seed converged";
    return out;
  }

  // Continuum detection: many distinct critical points at one W level.
  std::vector<double> values;
  for (const auto& pt : out.points) values.push_back(p.value(pt));
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  std::size_t best = 1;
  for (std::size_t i = 0, j = 0; i < sorted.size(); i = j) {
    j = i;
    while (j < sorted.size() && sorted[j] - sorted[i] <= 1e-9 * (1.0 + std::abs(sorted[i]))) ++j;
    best = std::max(best, j - i);
  }
  if (best > options.continuum_count) {
    out.continuum_suspected = true;
    out.note = "equilibrium continuum suspected: " + std::to_string(best) +
               " distinct critical points share one potential level";
  }
  return out;
}

}  // namespace grad2
