#pragma once

// Quasi-norms on grid functions (Lebesgue, weak Lebesgue, Lorentz, Morrey,
// weighted Lebesgue), BMO-type functionals and the Orlicz weak-type pair.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/weights.hpp"

namespace commbench {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SpaceKind { Lebesgue, WeakLebesgue, Lorentz, Morrey, WeightedLebesgue };

struct SpaceSpec {
  SpaceKind kind = SpaceKind::Lebesgue;
  double p = 2.0;
  double q = 2.0;        // Lorentz second index
  double lambda = -0.5;  // Morrey index
  std::optional<Weight> weight;

  static SpaceSpec lebesgue(double p) { return {SpaceKind::Lebesgue, p, p, 0.0, std::nullopt}; }
  static SpaceSpec weak(double p) { return {SpaceKind::WeakLebesgue, p, kInf, 0.0, std::nullopt}; }
  static SpaceSpec lorentz(double p, double q) { return {SpaceKind::Lorentz, p, q, 0.0, std::nullopt}; }
  static SpaceSpec morrey(double p, double lambda) { return {SpaceKind::Morrey, p, p, lambda, std::nullopt}; }
  static SpaceSpec weighted(double p, Weight w) { return {SpaceKind::WeightedLebesgue, p, p, 0.0, std::move(w)}; }

  /// Throws DomainError unless the parameters are admissible in dimension `dim`.
  void validate(int dim) const {
    detail::require(p > 0.0, "space exponent p must lie in (0, inf]");
    if (kind == SpaceKind::Lorentz) detail::require(q > 0.0, "Lorentz index q must lie in (0, inf]");
    if (kind == SpaceKind::Morrey) {
      detail::require(std::isfinite(p), "Morrey exponent p must be finite");
      detail::require(lambda >= -dim / p - 1e-12 && lambda < 0.0, "Morrey index must satisfy -dim/p <= lambda < 0");
    }
    if (kind == SpaceKind::WeightedLebesgue) {
      detail::require(weight.has_value(), "weighted Lebesgue space needs a weight");
      detail::require(weight->dim() == dim, "weight dimension mismatch");
    }
  }

  std::string describe() const {
    auto num = [](double v) {
      if (std::isinf(v)) return std::string("inf");
      char buf[32];
      return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    };
    switch (kind) {
      case SpaceKind::Lebesgue: return "L^" + num(p);
      case SpaceKind::WeakLebesgue: return "L^{" + num(p) + ",inf}";
      case SpaceKind::Lorentz: return "L^{" + num(p) + "," + num(q) + "}";
      case SpaceKind::Morrey: return "M^{" + num(p) + "," + num(lambda) + "}";
      case SpaceKind::WeightedLebesgue: return "L^" + num(p) + "(w)";
    }
    return "?";
  }
};

/// Constant K with ‖f + g‖ <= K(‖f‖ + ‖g‖).
inline double quasi_triangle_constant(const SpaceSpec& s) {
  auto lp = [](double p) { return p >= 1.0 ? 1.0 : std::pow(2.0, 1.0 / p - 1.0); };
  switch (s.kind) {
    case SpaceKind::Lebesgue:
    case SpaceKind::WeightedLebesgue:
    case SpaceKind::Morrey: return lp(s.p);
    case SpaceKind::WeakLebesgue: return std::isinf(s.p) ? 1.0 : std::pow(2.0, 1.0 / s.p);
    case SpaceKind::Lorentz:
      if (std::isinf(s.p)) return lp(s.q);
      return std::pow(2.0, 1.0 / s.p) * (std::isinf(s.q) ? 1.0 : lp(s.q));
  }
  return 1.0;
}

/// f* as nonincreasing blocks (value, measure).
struct RearrangedProfile {
  struct Block {
    double value;
    double measure;
  };
  std::vector<Block> blocks;

  double total_measure() const {
    double s = 0.0;
    for (const auto& b : blocks) s += b.measure;
    return s;
  }
  /// Right-continuous f*(t); zero beyond the total measure.
  double at(double t) const {
    double acc = 0.0;
    for (const auto& b : blocks) {
      acc += b.measure;
      if (t < acc) return b.value;
    }
    return 0.0;
  }
  /// Right endpoints of the blocks.
  std::vector<double> boundaries() const {
    std::vector<double> out;
    double acc = 0.0;
    for (const auto& b : blocks) out.push_back(acc += b.measure);
    return out;
  }
};

inline RearrangedProfile decreasing_rearrangement(const GridFunction& f) {
  std::vector<double> v(f.samples().begin(), f.samples().end());
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end(), std::greater<>());
  RearrangedProfile r;
  const double cell = f.cell_measure();
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    r.blocks.push_back({v[i], cell * static_cast<double>(j - i)});
    i = j;
  }
  return r;
}

namespace detail {

inline double lebesgue_norm(const GridFunction& f, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : f.samples()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  for (double v : f.samples()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.cell_measure(), 1.0 / p);
}

inline double lorentz_norm(const RearrangedProfile& prof, double p, double q) {
  if (std::isinf(q)) {
    double best = 0.0, t = 0.0;
    for (const auto& b : prof.blocks) {
      t += b.measure;
      best = std::max(best, std::isinf(p) ? b.value : b.value * std::pow(t, 1.0 / p));
    }
    return best;
  }
  if (std::isinf(p)) {
    for (const auto& b : prof.blocks)
      if (b.value > 0.0) return kInf;
    return 0.0;
  }
  // ∫_{t_{k-1}}^{t_k} t^{q/p} dt/t = (p/q)(t_k^{q/p} - t_{k-1}^{q/p}).
  const double r = q / p;
  double s = 0.0, t0 = 0.0;
  for (const auto& b : prof.blocks) {
    const double t1 = t0 + b.measure;
    if (b.value > 0.0) s += std::pow(b.value, q) * (std::pow(t1, r) - std::pow(t0, r)) / r;
    t0 = t1;
  }
  return std::pow(s, 1.0 / q);
}

}  // namespace detail

inline double norm(const GridFunction& f, const SpaceSpec& spec,
                   const std::vector<Cube>* cube_family = nullptr) {
  spec.validate(f.dim());
  switch (spec.kind) {
    case SpaceKind::Lebesgue: return detail::lebesgue_norm(f, spec.p);
    case SpaceKind::WeakLebesgue: return detail::lorentz_norm(decreasing_rearrangement(f), spec.p, kInf);
    case SpaceKind::Lorentz: return detail::lorentz_norm(decreasing_rearrangement(f), spec.p, spec.q);
    case SpaceKind::Morrey: {
      if (!cube_family || cube_family->empty()) throw DomainError("cube family required");
      const int n = f.dim();
      double best = 0.0;
      for (const Cube& q : *cube_family) {
        const CellRange r = f.cells_in(q);
        if (r.empty()) continue;
        double s = 0.0;
        f.for_each_cell(r, [&](std::size_t k) { s += std::pow(std::abs(f[k]), spec.p); });
        const double avg = s / static_cast<double>(r.size());
        best = std::max(best, std::pow(q.measure(), -spec.lambda / n) * std::pow(avg, 1.0 / spec.p));
      }
      return best;
    }
    case SpaceKind::WeightedLebesgue: {
      if (std::isinf(spec.p)) return detail::lebesgue_norm(f, spec.p);
      // Unit weight: same arithmetic as the unweighted norm.
      if (spec.weight->is_power() && spec.weight->as_power().a == 0.0) return detail::lebesgue_norm(f, spec.p);
      const std::vector<double> m = cell_masses(*spec.weight, f);
      double s = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k)
        if (f[k] != 0.0) s += std::pow(std::abs(f[k]), spec.p) * m[k];
      return std::pow(s, 1.0 / spec.p);
    }
  }
  return 0.0;
}

inline double norm(const GridFunction& f, const SpaceSpec& spec, const std::vector<Cube>& family) {
  return norm(f, spec, &family);
}

namespace detail {

struct CubeOscillation {
  double integral;  // ∫_Q |b - b_Q| over the cells of Q
  Cube hull;        // cube spanned by those cells
};

inline CubeOscillation oscillation_integral(const GridFunction& b, const Cube& q) {
  const CellRange r = b.cells_in(q);
  if (r.count(0) < 2 || (b.dim() == 2 && r.count(1) < 2))
    throw DomainError("cube is not resolved by the grid (fewer than 2 cells per axis)");
  double mean = 0.0;
  b.for_each_cell(r, [&](std::size_t k) { mean += b[k]; });
  mean /= static_cast<double>(r.size());
  double s = 0.0;
  b.for_each_cell(r, [&](std::size_t k) { s += std::abs(b[k] - mean); });
  return {s * b.cell_measure(), hull_of(b, r)};
}

}  // namespace detail

/// |Q|^{-1} ∫_Q |b - b_Q| over the cells whose centres lie in Q.
inline double mean_oscillation(const GridFunction& b, const Cube& q) {
  const auto o = detail::oscillation_integral(b, q);
  return o.integral / o.hull.measure();
}

/// μ(Q) for the BMO_μ scale.
struct MuFunctional {
  enum class Kind { LebesgueMeasure, LipBeta, WeightedLip, WeightedMeasure };
  Kind kind = Kind::LebesgueMeasure;
  double beta = 1.0;
  std::optional<Weight> weight;

  static MuFunctional lebesgue() { return {}; }
  static MuFunctional lip(double beta) {
    detail::require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    return {Kind::LipBeta, beta, std::nullopt};
  }
  static MuFunctional weighted_lip(double beta, Weight w) {
    detail::require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
    return {Kind::WeightedLip, beta, std::move(w)};
  }
  /// μ(Q) = w(Q), the two-weight (Bloom) case.
  static MuFunctional weighted_measure(Weight w) { return {Kind::WeightedMeasure, 0.0, std::move(w)}; }

  double operator()(const Cube& q) const {
    const double n = q.dim;
    double v = 0.0;
    switch (kind) {
      case Kind::LebesgueMeasure: v = q.measure(); break;
      case Kind::LipBeta: v = std::pow(q.measure(), 1.0 + beta / n); break;
      case Kind::WeightedLip: v = std::pow(weight_mass(*weight, q), 1.0 + beta / n); break;
      case Kind::WeightedMeasure: v = weight_mass(*weight, q); break;
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw NumericalError("mu functional is not a positive finite number on a cube");
    return v;
  }
};

/// max over the family of μ(Q)^{-1} ∫_Q |b - b_Q|. μ is evaluated on the
/// cube spanned by the grid cells of Q.
inline double bmo_mu_norm(const GridFunction& b, const MuFunctional& mu, const std::vector<Cube>& family) {
  detail::require(!family.empty(), "cube family must be nonempty");
  double best = 0.0;
  for (const Cube& q : family) {
    const auto o = detail::oscillation_integral(b, q);
    best = std::max(best, o.integral / mu(o.hull));
  }
  return best;
}

/// max |b(x) - b(y)| / |x - y|^β over a pair set: every pair at power-of-two
/// lattice offsets (axes and diagonals), plus all pairs among a strided
/// subsample of at most 512 cells.
inline double lipschitz_seminorm(const GridFunction& b, double beta) {
  detail::require(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]");
  const int n = b.resolution();
  const int dim = b.dim();
  double best = 0.0;
  auto pair = [&](std::size_t k, std::size_t l) {
    const double d = norm2(b.cell_center(k) - b.cell_center(l), dim);
    if (d > 0.0) best = std::max(best, std::abs(b[k] - b[l]) / std::pow(d, beta));
  };
  std::vector<std::array<int, 2>> dirs{{1, 0}};
  if (dim == 2) dirs = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (int s = 1; s < n; s *= 2)
    for (const auto& d : dirs) {
      const int ny = dim == 2 ? n : 1;
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < n; ++i) {
          const int i2 = i + s * d[0], j2 = j + s * d[1];
          if (i2 < 0 || i2 >= n || j2 < 0 || j2 >= ny) continue;
          pair(b.index(i, j), b.index(i2, j2));
        }
    }
  const std::size_t stride = std::max<std::size_t>(1, (b.size() + 511) / 512);
  for (std::size_t k = 0; k < b.size(); k += stride)
    for (std::size_t l = k + stride; l < b.size(); l += stride) pair(k, l);
  return best;
}

/// Φ(t) = t(1 + log⁺ t).
inline double orlicz_phi(double t) { return t * (1.0 + (t > 1.0 ? std::log(t) : 0.0)); }

struct OrliczPair {
  double lhs = 0.0;  // ω({|g| > λ})
  double rhs = 0.0;  // ∫ Φ(|f|/λ) ω
};

inline OrliczPair orlicz_weak_ratio(const GridFunction& g, const GridFunction& f, double lambda, const Weight& omega) {
  detail::require(lambda > 0.0, "lambda must be positive");
  OrliczPair r;
  const std::vector<double> mg = cell_masses(omega, g);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (std::abs(g[k]) > lambda) r.lhs += mg[k];
  const std::vector<double> mf = cell_masses(omega, f);
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f[k] != 0.0) r.rhs += orlicz_phi(std::abs(f[k]) / lambda) * mf[k];
  return r;
}

}  // namespace commbench
