#pragma once

// Weights (power and sampled), Muckenhoupt-type constants, doubling ratios and
// product weights.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "commbench/error.hpp"
#include "commbench/geometry.hpp"

namespace commbench {

/// w(x) = |x - center|^a, locally integrable iff a > -dim.
struct PowerWeight {
  double a = 0.0;
  Point center{0.0, 0.0};
};

/// Piecewise constant positive weight on a grid.
struct SampledWeight {
  GridFunction samples;
};

class Weight {
 public:
  using Form = std::variant<PowerWeight, SampledWeight>;

  Weight() : dim_(1), form_(PowerWeight{}) {}

  static Weight power(int dim, double a, Point center = {0.0, 0.0}) {
    detail::require(dim == 1 || dim == 2, "weight dimension must be 1 or 2");
    detail::require(std::isfinite(a) && a > -dim, "power weight exponent must exceed -dim");
    if (dim == 1) center[1] = 0.0;
    return Weight(dim, PowerWeight{a, center});
  }
  static Weight unit(int dim) { return power(dim, 0.0); }

  static Weight sampled(GridFunction g) {
    for (double v : g.samples())
      if (!(v > 0.0)) throw DomainError("weight samples must be positive");
    const int dim = g.dim();
    return Weight(dim, SampledWeight{std::move(g)});
  }

  int dim() const { return dim_; }
  const Form& form() const { return form_; }
  bool is_power() const { return std::holds_alternative<PowerWeight>(form_); }
  const PowerWeight& as_power() const { return std::get<PowerWeight>(form_); }
  const GridFunction& as_grid() const { return std::get<SampledWeight>(form_).samples; }

  /// Pointwise value. Power weights with a < 0 are +inf at their centre.
  double operator()(const Point& x) const {
    if (is_power()) {
      const auto& pw = as_power();
      if (pw.a == 0.0) return 1.0;
      return std::pow(norm2(x - pw.center, dim_), pw.a);
    }
    return as_grid().value_at(x);
  }

  /// w^s. Power forms stay exact and may leave the integrable range.
  Weight pow(double s) const {
    if (is_power()) {
      const auto& pw = as_power();
      return Weight(dim_, PowerWeight{pw.a * s, pw.center});
    }
    return Weight(dim_, SampledWeight{as_grid().map([s](double v) { return std::pow(v, s); })});
  }

  /// Grid samples of this weight at the cell centres of `g`.
  GridFunction sampled_on(const GridFunction& g) const {
    if (!is_power()) {
      const GridFunction& own = as_grid();
      if (!(own.domain() == g.domain()) || own.resolution() != g.resolution())
        throw DomainError("weight grid does not match");
      return own;
    }
    return GridFunction::sample(g.domain(), g.resolution(), [this](const Point& x) { return (*this)(x); });
  }

 private:
  Weight(int dim, Form f) : dim_(dim), form_(std::move(f)) {}
  int dim_;
  Form form_;
};

namespace detail {

struct GaussRule {
  std::vector<double> x, w;
};

/// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    r.x[i] = z;
    r.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

inline const GaussRule& gauss24() {
  static const GaussRule rule = gauss_legendre(24);
  return rule;
}

/// Composite Gauss-Legendre on [lo, hi] with `panels` panels.
template <class F>
double quad(F&& f, double lo, double hi, int panels = 4) {
  const auto& g = gauss24();
  const double step = (hi - lo) / panels;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = lo + k * step, half = 0.5 * step;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(a + half * (1.0 + g.x[i]));
  }
  return s * 0.5 * step;
}

/// ∫_0^A ∫_0^B (x^2+y^2)^{b/2} dy dx for A, B >= 0, requires b > -2.
inline double corner_power_integral(double A, double B, double b) {
  if (A <= 0.0 || B <= 0.0) return 0.0;
  const double e = b + 2.0;
  const double t0 = std::atan2(B, A);
  const double first = quad([&](double t) { return std::pow(A / std::cos(t), e); }, 0.0, t0);
  const double second =
      quad([&](double t) { return std::pow(B / std::sin(t), e); }, t0, 0.5 * std::numbers::pi);
  return (first + second) / e;
}

/// ∫_Q |x - c|^b dx; +inf when b <= -dim and Q touches c.
inline double power_integral(const Cube& q, const PowerWeight& pw, int dim) {
  const double b = pw.a;
  if (b == 0.0) return q.measure();
  if (dim == 1) {
    const double x0 = q.lower(0) - pw.center[0], x1 = q.upper(0) - pw.center[0];
    if (b <= -1.0) {
      if (x0 <= 0.0 && x1 >= 0.0) return std::numeric_limits<double>::infinity();
      if (b == -1.0) return std::log(std::abs(x1) / std::abs(x0)) * (x1 > 0 ? 1.0 : -1.0);
    }
    auto F = [b](double u) { return std::copysign(std::pow(std::abs(u), b + 1.0) / (b + 1.0), u); };
    return F(x1) - F(x0);
  }
  const double x0 = q.lower(0) - pw.center[0], x1 = q.upper(0) - pw.center[0];
  const double y0 = q.lower(1) - pw.center[1], y1 = q.upper(1) - pw.center[1];
  if (b <= -2.0) {
    if (x0 <= 0.0 && x1 >= 0.0 && y0 <= 0.0 && y1 >= 0.0) return std::numeric_limits<double>::infinity();
    // Away from the singularity the integrand is smooth: tensor Gauss rule.
    return quad([&](double x) {
      return quad([&](double y) { return std::pow(std::hypot(x, y), b); }, y0, y1, 8);
    }, x0, x1, 8);
  }
  auto G = [b](double u, double v) {
    const double s = (u < 0 ? -1.0 : 1.0) * (v < 0 ? -1.0 : 1.0);
    return s * corner_power_integral(std::abs(u), std::abs(v), b);
  };
  return G(x1, y1) - G(x0, y1) - G(x1, y0) + G(x0, y0);
}

}  // namespace detail

/// w(Q) = ∫_Q w. Sampled weights use the cells whose centres lie in Q.
inline double weight_mass(const Weight& w, const Cube& q) {
  if (w.is_power()) return detail::power_integral(q, w.as_power(), w.dim());
  return integrate_over(w.as_grid(), q);
}

/// Average of w over Q. Sampled weights average over the discrete cell set.
inline double weight_average(const Weight& w, const Cube& q) {
  if (w.is_power()) return weight_mass(w, q) / q.measure();
  const GridFunction& g = w.as_grid();
  const CellRange r = g.cells_in(q);
  if (r.empty()) throw DomainError("cube contains no weight samples");
  double s = 0.0;
  g.for_each_cell(r, [&](std::size_t k) { s += g[k]; });
  return s / static_cast<double>(r.size());
}

/// ∫ w over each cell of `g` (exact for power weights).
inline std::vector<double> cell_masses(const Weight& w, const GridFunction& g) {
  std::vector<double> out(g.size());
  if (!w.is_power()) {
    const GridFunction s = w.sampled_on(g);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = s[k] * g.cell_measure();
    return out;
  }
  const double h = g.cell_side();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = weight_mass(w, Cube{g.dim(), g.cell_center(k), h});
  return out;
}

/// max over the family of (avg_Q w)(avg_Q w^{1-p'})^{p-1}.
inline double ap_constant(const Weight& w, double p, const std::vector<Cube>& family) {
  detail::require(p > 1.0, "A_p requires p > 1");
  detail::require(!family.empty(), "cube family must be nonempty");
  const double pp = p / (p - 1.0);
  const Weight dual = w.pow(1.0 - pp);
  double best = 0.0;
  for (const Cube& q : family) {
    const double v = weight_average(w, q) * std::pow(weight_average(dual, q), p - 1.0);
    best = std::max(best, v);
  }
  return best;
}

/// max over the family of (avg_Q w^q)^{1/q}(avg_Q w^{-p'})^{1/p'}.
inline double apq_constant(const Weight& w, double p, double q, const std::vector<Cube>& family) {
  detail::require(p > 1.0 && p <= q && std::isfinite(q), "A_{p,q} requires 1 < p <= q < inf");
  detail::require(!family.empty(), "cube family must be nonempty");
  const double pp = p / (p - 1.0);
  const Weight wq = w.pow(q), wd = w.pow(-pp);
  double best = 0.0;
  for (const Cube& c : family) {
    const double v = std::pow(weight_average(wq, c), 1.0 / q) * std::pow(weight_average(wd, c), 1.0 / pp);
    best = std::max(best, v);
  }
  return best;
}

struct DoublingResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

/// max of w(2Q)/w(Q) over the family. Pairs whose 2Q leaves the sampled domain
/// (or `domain`, when given) are skipped and counted.
inline DoublingResult doubling_constant(const Weight& w, const std::vector<Cube>& family,
                                        std::optional<Cube> domain = std::nullopt) {
  if (!domain && !w.is_power()) domain = w.as_grid().domain();
  DoublingResult r;
  for (const Cube& q : family) {
    const Cube q2 = dilate(q, 2.0);
    if (domain && !domain->contains(q2)) {
      ++r.skipped;
      continue;
    }
    const double m = weight_mass(w, q);
    if (!(m > 0.0)) throw NumericalError("weight has zero mass on a cube");
    r.value = std::max(r.value, weight_mass(w, q2) / m);
    ++r.used;
  }
  return r;
}

/// ∏ w_j^{e_j}. Same-centre power weights combine exactly; anything else is
/// sampled on the (single) grid carried by the sampled factors.
inline Weight product_weight(const std::vector<Weight>& weights, const std::vector<double>& exponents) {
  detail::require(!weights.empty() && weights.size() == exponents.size(),
                  "weights and exponents must be nonempty lists of equal length");
  const int dim = weights.front().dim();
  bool all_power = true;
  const GridFunction* grid = nullptr;
  for (const Weight& w : weights) {
    detail::require(w.dim() == dim, "weights must share a dimension");
    if (w.is_power()) {
      if (!weights.front().is_power() || w.as_power().center != weights.front().as_power().center)
        all_power = false;
    } else {
      all_power = false;
      const GridFunction& g = w.as_grid();
      if (grid && (!(grid->domain() == g.domain()) || grid->resolution() != g.resolution()))
        throw DomainError("grid mismatch between sampled weights");
      grid = &g;
    }
  }
  if (all_power) {
    double a = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) a += exponents[j] * weights[j].as_power().a;
    return Weight::power(dim, a, weights.front().as_power().center);
  }
  if (!grid) throw DomainError("power weights with distinct centres need a common grid");
  std::vector<double> out(grid->size(), 1.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const GridFunction s = weights[j].sampled_on(*grid);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= std::pow(s[k], exponents[j]);
  }
  return Weight::sampled(GridFunction(grid->domain(), grid->resolution(), std::move(out)));
}

struct BloomCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio() const { return lhs / rhs; }
};

/// lhs = |Q| ω(Q)^{1/p}, rhs = λ(Q)^{1/p} μ(Q) with μ(Q) = ∫_Q (ω/λ)^{1/p}.
inline BloomCheck bloom_inequality_check(const Weight& omega, const Weight& lam, double p, const Cube& q) {
  detail::require(p > 1.0, "Bloom check requires p > 1");
  BloomCheck r;
  r.lhs = q.measure() * std::pow(weight_mass(omega, q), 1.0 / p);
  double mu = 0.0;
  const bool distinct_powers = omega.is_power() && lam.is_power() &&
                               omega.as_power().center != lam.as_power().center;
  if (distinct_powers) {
    const int n = q.dim == 1 ? 4096 : 256;
    const GridFunction g = GridFunction::constant(q, n, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Point x = g.cell_center(k);
      mu += std::pow(omega(x) / lam(x), 1.0 / p);
    }
    mu *= g.cell_measure();
  } else {
    mu = weight_mass(product_weight({omega, lam}, {1.0 / p, -1.0 / p}), q);
  }
  r.rhs = std::pow(weight_mass(lam, q), 1.0 / p) * mu;
  return r;
}

}  // namespace commbench
