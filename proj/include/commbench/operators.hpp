#pragma once

// Rough homogeneous kernels Ω(x)/|x|^{n-α}, their admissibility functionals,
// and the bilinear fractional integral with the radial kernel.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "commbench/error.hpp"
#include "commbench/geometry.hpp"

namespace commbench {

enum class Interpolation { Linear, Nearest };

/// Degree-zero homogeneous symbol Ω. In dim 1 the sphere is {+1, -1}; in dim 2
/// Ω is tabulated at angles 2πk/M.
class SphereSymbol {
 public:
  static SphereSymbol pair(double plus, double minus) {
    detail::require(std::isfinite(plus) && std::isfinite(minus), "symbol values must be finite");
    SphereSymbol s;
    s.dim_ = 1;
    s.table_ = {plus, minus};
    return s;
  }

  static SphereSymbol table(std::vector<double> values, Interpolation rule = Interpolation::Linear) {
    detail::require(values.size() >= 8, "angle table needs at least 8 entries");
    for (double v : values) detail::require(std::isfinite(v), "symbol values must be finite");
    SphereSymbol s;
    s.dim_ = 2;
    s.table_ = std::move(values);
    s.rule_ = rule;
    return s;
  }

  template <class F>
  static SphereSymbol from_angle(int m, F&& omega_of_theta, Interpolation rule = Interpolation::Linear) {
    std::vector<double> v(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) v[k] = omega_of_theta(2.0 * std::numbers::pi * k / m);
    return table(std::move(v), rule);
  }

  static SphereSymbol constant(int dim, double c, int m = 64) {
    return dim == 1 ? pair(c, c) : from_angle(m, [c](double) { return c; });
  }

  int dim() const { return dim_; }
  const std::vector<double>& values() const { return table_; }
  Interpolation rule() const { return rule_; }
  std::size_t size() const { return table_.size(); }

  double node_angle(std::size_t k) const { return 2.0 * std::numbers::pi * k / table_.size(); }

  /// Ω at angle θ (dim 2).
  double at_angle(double theta) const {
    const double m = static_cast<double>(table_.size());
    double t = theta / (2.0 * std::numbers::pi) * m;
    t -= m * std::floor(t / m);
    if (rule_ == Interpolation::Nearest) {
      auto k = static_cast<std::size_t>(std::llround(t)) % table_.size();
      return table_[k];
    }
    const auto k = static_cast<std::size_t>(std::floor(t)) % table_.size();
    const double frac = t - std::floor(t);
    return (1.0 - frac) * table_[k] + frac * table_[(k + 1) % table_.size()];
  }

  /// Ω(x / |x|); zero at the origin.
  double operator()(const Point& x) const {
    if (dim_ == 1) {
      if (x[0] > 0.0) return table_[0];
      if (x[0] < 0.0) return table_[1];
      return 0.0;
    }
    if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
    return at_angle(std::atan2(x[1], x[0]));
  }

 private:
  int dim_ = 1;
  std::vector<double> table_{0.0, 0.0};
  Interpolation rule_ = Interpolation::Linear;
};

/// Normalized spherical mean of Ω.
inline double check_mean_zero(const SphereSymbol& s) {
  const auto& v = s.values();
  if (s.dim() == 1) return 0.5 * (v[0] + v[1]);
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

/// Normalized first angular moments ∫ Ω(x') x'_j dσ / σ(S^{n-1}).
inline Point check_first_moments(const SphereSymbol& s) {
  const auto& v = s.values();
  if (s.dim() == 1) return {0.5 * (v[0] - v[1]), 0.0};
  Point m{0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    m[0] += v[k] * std::cos(s.node_angle(k));
    m[1] += v[k] * std::sin(s.node_angle(k));
  }
  const double inv = 1.0 / static_cast<double>(v.size());
  return {m[0] * inv, m[1] * inv};
}

struct KernelSpec {
  SphereSymbol symbol;
  double alpha = 0.0;

  static constexpr double kMomentTolerance = 1e-9;

  static KernelSpec make(SphereSymbol symbol, double alpha) {
    KernelSpec k{std::move(symbol), alpha};
    k.validate();
    return k;
  }

  int dim() const { return symbol.dim(); }

  void validate() const {
    const int n = dim();
    detail::require(alpha >= -1.0 && alpha < n, "kernel order alpha must lie in [-1, dim)");
    if (alpha <= 0.0)
      detail::require(std::abs(check_mean_zero(symbol)) <= kMomentTolerance,
                      "alpha <= 0 requires a mean-zero symbol");
    if (alpha == -1.0) {
      const Point m = check_first_moments(symbol);
      detail::require(std::abs(m[0]) <= kMomentTolerance && std::abs(m[1]) <= kMomentTolerance,
                      "alpha = -1 requires vanishing first moments");
    }
  }

  /// Ω(x)/|x|^{n-α}; zero at the origin.
  double kernel(const Point& x) const {
    const double r = norm2(x, dim());
    if (r == 0.0) return 0.0;
    return symbol(x) * std::pow(r, alpha - dim());
  }
};

/// T_α f at each point: midpoint sum over source cells farther than
/// `exclusion` from the point.
inline std::vector<double> apply_T(const KernelSpec& k, const GridFunction& f, const std::vector<Point>& points,
                                   double exclusion) {
  detail::require(k.dim() == f.dim(), "kernel and function dimensions differ");
  detail::require(exclusion >= 0.0, "exclusion radius must be nonnegative");
  const Cube& support = f.domain();
  const double cut = exclusion * (1.0 - 1e-9);
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < f.size(); ++c)
    if (f[c] != 0.0) active.push_back(c);
  std::vector<Point> centers(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) centers[i] = f.cell_center(active[i]);

  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    const bool inside = support.contains(x);
    if (inside && k.alpha == -1.0)
      throw DomainError("alpha = -1 operator is only evaluated off the support");
    if (inside && k.alpha <= 0.0 && exclusion < f.cell_diameter() * (1.0 - 1e-9))
      throw NumericalError("PV truncation under-resolved");
    double s = 0.0;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const Point d = x - centers[j];
      if (norm2(d, f.dim()) <= cut) continue;
      s += k.kernel(d) * f[active[j]];
    }
    out[i] = s * f.cell_measure();
  }
  return out;
}

/// Arc (dim 2) or sphere point (dim 1) where Ω keeps one sign and stays
/// bounded away from zero.
struct Cone {
  int dim = 1;
  Point direction{1.0, 0.0};  // unit centre direction
  double half_width = 0.0;    // radians; 0 in dim 1
  double sign = 1.0;
  double c = 0.0;  // min of Ω over the cone
  double C = 0.0;  // max of Ω over the cone
  double lower_abs() const { return std::min(std::abs(c), std::abs(C)); }
  double upper_abs() const { return std::max(std::abs(c), std::abs(C)); }
  /// Directions at the table nodes inside the cone (dim 2) or the point (dim 1).
  std::vector<Point> directions;
};

/// Scans for the longest run of table nodes with one sign and |Ω| >= threshold
/// (default half of max |Ω|). dim 1 takes the larger of |Ω(±1)|, ties to +1.
inline std::optional<Cone> lower_upper_cone(const SphereSymbol& s, std::optional<double> threshold = std::nullopt) {
  const auto& v = s.values();
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return std::nullopt;
  Cone cone;
  cone.dim = s.dim();
  if (s.dim() == 1) {
    const bool plus = std::abs(v[0]) >= std::abs(v[1]);
    const double val = plus ? v[0] : v[1];
    cone.direction = {plus ? 1.0 : -1.0, 0.0};
    cone.sign = val > 0 ? 1.0 : -1.0;
    cone.c = cone.C = val;
    cone.directions = {cone.direction};
    return cone;
  }
  const double thr = threshold.value_or(0.5 * vmax);
  if (!(thr > 0.0)) return std::nullopt;
  const std::size_t m = v.size();
  auto mark = [&](std::size_t k) -> int {
    if (std::abs(v[k]) < thr) return 0;
    return v[k] > 0 ? 1 : -1;
  };
  bool all_same = true;
  for (std::size_t k = 0; k < m; ++k) all_same = all_same && mark(k) != 0 && mark(k) == mark(0);
  std::size_t best_start = 0, best_len = 0;
  if (all_same) {
    best_len = m;
  } else {
    for (std::size_t k = 0; k < m; ++k) {
      const int sg = mark(k);
      if (sg == 0 || mark((k + m - 1) % m) == sg) continue;  // not a run start
      std::size_t len = 1;
      while (len < m && mark((k + len) % m) == sg) ++len;
      if (len > best_len) best_len = len, best_start = k;
    }
  }
  if (best_len == 0) return std::nullopt;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(m);
  const double centre = (static_cast<double>(best_start) + 0.5 * static_cast<double>(best_len - 1)) * step;
  cone.direction = {std::cos(centre), std::sin(centre)};
  cone.half_width = best_len == m ? std::numbers::pi : 0.5 * static_cast<double>(best_len - 1) * step;
  cone.c = std::numeric_limits<double>::infinity();
  cone.C = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < best_len; ++l) {
    const std::size_t k = (best_start + l) % m;
    cone.c = std::min(cone.c, v[k]);
    cone.C = std::max(cone.C, v[k]);
    cone.directions.push_back({std::cos(s.node_angle(k)), std::sin(s.node_angle(k))});
  }
  cone.sign = cone.C > 0 ? 1.0 : -1.0;
  return cone;
}

enum class ZMode { Linf, L1 };

/// ‖∫_{Q0} |Ω(x - y + h) - Ω(x + h)| dy‖_{Z(Q0)}, Q0 the unit cube centred at
/// the origin, midpoint rule with N0 cells per axis.
inline double kernel_oscillation(const SphereSymbol& s, const Point& h, ZMode mode, int n0) {
  const int dim = s.dim();
  detail::require(norm2(h, dim) > std::sqrt(static_cast<double>(dim)), "shift must satisfy |h| > sqrt(dim)");
  detail::require(n0 >= 2, "resolution must be at least 2");
  const Cube q0 = Cube::make(dim, {0.0, 0.0}, 1.0);
  const GridFunction grid = GridFunction::constant(q0, n0, 0.0);
  const std::vector<Point> pts = all_cell_centers(grid);
  const double cell = grid.cell_measure();
  double best = 0.0, total = 0.0;
  for (const Point& x : pts) {
    const Point xh = x + h;
    const double ref = s(xh);
    double inner = 0.0;
    for (const Point& y : pts) inner += std::abs(s(xh - y) - ref);
    inner *= cell;
    best = std::max(best, inner);
    total += inner * cell;
  }
  return mode == ZMode::Linf ? best : total;
}

/// Normalized average of |Ω(z') - Ω(x')| over the cap of chordal radius r.
inline double lebesgue_point_modulus(const SphereSymbol& s, const Point& direction, double r) {
  detail::require(r > 0.0 && r <= 1.0, "cap radius must lie in (0, 1]");
  if (s.dim() == 1) return 0.0;
  const double theta0 = std::atan2(direction[1], direction[0]);
  const double ref = s.at_angle(theta0);
  const double phi = 2.0 * std::asin(0.5 * r);
  constexpr int kSamples = 4096;
  double sum = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double t = -phi + (i + 0.5) * (2.0 * phi / kSamples);
    sum += std::abs(s.at_angle(theta0 + t) - ref);
  }
  return sum / kSamples;
}

/// min over the given unit directions h' of kernel_oscillation(d h', L1).
inline double directional_inf_oscillation(const SphereSymbol& s, double d, const std::vector<Point>& directions,
                                          int n0 = 32) {
  detail::require(!directions.empty(), "direction set must be nonempty");
  detail::require(d > std::sqrt(static_cast<double>(s.dim())), "distance must exceed sqrt(dim)");
  double best = std::numeric_limits<double>::infinity();
  for (const Point& u : directions) best = std::min(best, kernel_oscillation(s, d * u, ZMode::L1, n0));
  return best;
}

struct BilinearFractionalSpec {
  int dim = 1;
  double alpha = 1.0;
  double smoothness_delta = 1.0;

  static BilinearFractionalSpec make(int dim, double alpha, double delta = 1.0) {
    BilinearFractionalSpec s{dim, alpha, delta};
    s.validate();
    return s;
  }
  void validate() const {
    detail::require(dim == 1 || dim == 2, "dimension must be 1 or 2");
    detail::require(alpha > 0.0 && alpha < 2.0 * dim, "bilinear order alpha must lie in (0, 2 dim)");
    detail::require(smoothness_delta > 0.0, "smoothness exponent must be positive");
  }
  /// (|x-y|^2 + |x-z|^2)^{(α-2n)/2}
  double kernel(const Point& x, const Point& y, const Point& z) const {
    const Point a = x - y, b = x - z;
    const double r2 = a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1];
    if (r2 == 0.0) return 0.0;
    return std::pow(r2, 0.5 * (alpha - 2.0 * dim));
  }
};

struct I2Result {
  std::vector<double> values;
  std::vector<std::size_t> excluded;  // diagonal cell pairs skipped per point
};

inline I2Result apply_I2(const BilinearFractionalSpec& spec, const GridFunction& f1, const GridFunction& f2,
                         const std::vector<Point>& points) {
  spec.validate();
  detail::require(f1.dim() == spec.dim && f2.dim() == spec.dim, "function dimensions differ from the kernel");
  auto active = [](const GridFunction& f) {
    std::vector<std::pair<Point, double>> out;
    for (std::size_t c = 0; c < f.size(); ++c)
      if (f[c] != 0.0) out.emplace_back(f.cell_center(c), f[c]);
    return out;
  };
  const auto a1 = active(f1), a2 = active(f2);
  const double d1 = f1.cell_diameter(), d2 = f2.cell_diameter();
  const double e = 0.5 * (spec.alpha - 2.0 * spec.dim);
  const double w = f1.cell_measure() * f2.cell_measure();
  I2Result r;
  r.values.assign(points.size(), 0.0);
  r.excluded.assign(points.size(), 0);
  std::vector<double> r1(a1.size()), r2(a2.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    for (std::size_t j = 0; j < a1.size(); ++j) {
      const Point d = x - a1[j].first;
      r1[j] = d[0] * d[0] + d[1] * d[1];
    }
    for (std::size_t j = 0; j < a2.size(); ++j) {
      const Point d = x - a2[j].first;
      r2[j] = d[0] * d[0] + d[1] * d[1];
    }
    double s = 0.0;
    for (std::size_t j = 0; j < a1.size(); ++j) {
      const bool near1 = r1[j] < d1 * d1;
      double inner = 0.0;
      for (std::size_t l = 0; l < a2.size(); ++l) {
        if (near1 && r2[l] < d2 * d2) {
          ++r.excluded[i];
          continue;
        }
        inner += a2[l].second * std::pow(r1[j] + r2[l], e);
      }
      s += a1[j].second * inner;
    }
    r.values[i] = s * w;
  }
  return r;
}

/// |h|^{2n-α} |Q|^{-α/n} sup_{x∈Q} ∬_{Q1×Q2} |K(x,y,z) - K(x,c1,z)| dy dz with
/// Q_j = Q - |Q|^{1/n} h^j and c1 the centre of Q1.
inline double bilinear_kernel_oscillation(const BilinearFractionalSpec& spec, const std::pair<Point, Point>& h,
                                          const Cube& q, int n0) {
  spec.validate();
  detail::require(q.dim == spec.dim, "cube dimension differs from the kernel");
  detail::require(n0 >= 2, "resolution must be at least 2");
  const int n = spec.dim;
  const double ell = q.side;
  const Cube q1 = translate(q, h.first, -ell), q2 = translate(q, h.second, -ell);
  if (!q.interior_disjoint(q1) || !q.interior_disjoint(q2))
    throw DomainError("shifted source cubes overlap the target cube");
  const auto xs = all_cell_centers(GridFunction::constant(q, n0, 0.0));
  const GridFunction g1 = GridFunction::constant(q1, n0, 0.0), g2 = GridFunction::constant(q2, n0, 0.0);
  const auto ys = all_cell_centers(g1), zs = all_cell_centers(g2);
  const double cell = g1.cell_measure() * g2.cell_measure();
  double sup = 0.0;
  for (const Point& x : xs) {
    double s = 0.0;
    for (const Point& z : zs) {
      const double ref = spec.kernel(x, q1.center, z);
      for (const Point& y : ys) s += std::abs(spec.kernel(x, y, z) - ref);
    }
    sup = std::max(sup, s * cell);
  }
  const double hn = std::sqrt(h.first[0] * h.first[0] + h.first[1] * h.first[1] + h.second[0] * h.second[0] +
                              h.second[1] * h.second[1]);
  return std::pow(hn, 2.0 * n - spec.alpha) * std::pow(q.measure(), -spec.alpha / n) * sup;
}

}  // namespace commbench
