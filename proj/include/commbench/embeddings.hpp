#pragma once

// Product embeddings Y·Z ⊂ Ỹ for Lorentz and Morrey scales, and indicator
// norm identities.

#include <cmath>
#include <vector>

#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/spaces.hpp"

namespace commbench {

struct ProductCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  /// Constant C with lhs <= C rhs for every input.
  double constant = 1.0;
  bool holds() const { return lhs <= constant * rhs * (1.0 + 1e-12) + 1e-300; }
};

/// lhs = ‖fg‖_{L^{p̃,q̃}}, rhs = ‖f‖_{L^{1,1}} ‖g‖_{L^{p,q}} with 1/p̃ = 1 + 1/p,
/// 1/q̃ = 1 + 1/q. From (fg)*(t) <= f*(t/2) g*(t/2) and Hölder in L^q(dt/t)
/// the constant is 2^{1+1/p}.
inline ProductCheck lorentz_product_check(const GridFunction& f, const GridFunction& g, double p, double q) {
  detail::require(p > 0.0 && q > 0.0, "Lorentz indices must lie in (0, inf]");
  detail::require(f.domain() == g.domain() && f.resolution() == g.resolution(), "f and g must share a grid");
  const double pt = 1.0 / (1.0 + 1.0 / p), qt = 1.0 / (1.0 + 1.0 / q);
  std::vector<double> fg(f.size());
  for (std::size_t k = 0; k < fg.size(); ++k) fg[k] = f[k] * g[k];
  const GridFunction h(f.domain(), f.resolution(), std::move(fg));
  ProductCheck r;
  r.lhs = norm(h, SpaceSpec::lorentz(pt, qt));
  r.rhs = norm(f, SpaceSpec::lorentz(1.0, 1.0)) * norm(g, SpaceSpec::lorentz(p, q));
  r.constant = std::pow(2.0, 1.0 + 1.0 / p);
  return r;
}

/// lhs = ‖fg‖_{M^{p̃,λ̃}}, rhs = ‖f‖_{M^{p,λ}} ‖g‖_{L^1} with 1/p̃ = 1 + 1/p,
/// λ̃ = λ - n. Hölder gives constant 1 on families of grid-aligned cubes.
inline ProductCheck morrey_product_check(const GridFunction& f, const GridFunction& g, double p, double lam,
                                         const std::vector<Cube>& family) {
  const int n = f.dim();
  detail::require(p > 0.0 && std::isfinite(p), "Morrey exponent must be finite and positive");
  detail::require(lam >= -n / p - 1e-12 && lam < 0.0, "Morrey index must satisfy -dim/p <= lambda < 0");
  detail::require(f.domain() == g.domain() && f.resolution() == g.resolution(), "f and g must share a grid");
  const double pt = 1.0 / (1.0 + 1.0 / p);
  std::vector<double> fg(f.size());
  for (std::size_t k = 0; k < fg.size(); ++k) fg[k] = f[k] * g[k];
  const GridFunction h(f.domain(), f.resolution(), std::move(fg));
  ProductCheck r;
  r.lhs = norm(h, SpaceSpec::morrey(pt, lam - n), family);
  r.rhs = norm(f, SpaceSpec::morrey(p, lam), family) * norm(g, SpaceSpec::lebesgue(1.0));
  r.constant = 1.0;
  return r;
}

struct IndicatorCheck {
  double computed = 0.0;
  double closed_form = 0.0;     // |Q|^{1/p} or |Q|^{-λ/n}
  double exact_constant = 1.0;  // (p/q)^{1/q} for Lorentz, else 1
  double ratio() const { return computed / (exact_constant * closed_form); }
};

/// ‖χ_Q‖ computed on a grid over 2Q with `resolution` cells per axis. Morrey
/// uses the dyadic family of 2Q with half-step translates (it contains Q).
inline IndicatorCheck indicator_norm_check(const SpaceSpec& spec, const Cube& q, int resolution = 1024) {
  detail::require(spec.kind != SpaceKind::WeightedLebesgue, "indicator check excludes weighted spaces");
  spec.validate(q.dim);
  const Cube outer = dilate(q, 2.0);
  const GridFunction chi =
      GridFunction::sample(outer, resolution, [&](const Point& x) { return q.contains(x) ? 1.0 : 0.0; });
  IndicatorCheck r;
  const double m = q.measure();
  switch (spec.kind) {
    case SpaceKind::Morrey: {
      const auto family = dyadic_family_with_half_shifts(outer, 4);
      r.computed = norm(chi, spec, family);
      r.closed_form = std::pow(m, -spec.lambda / q.dim);
      return r;
    }
    case SpaceKind::Lorentz:
      if (!std::isinf(spec.q)) r.exact_constant = std::pow(spec.p / spec.q, 1.0 / spec.q);
      [[fallthrough]];
    default:
      r.computed = norm(chi, spec);
      r.closed_form = std::isinf(spec.p) ? 1.0 : std::pow(m, 1.0 / spec.p);
      return r;
  }
}

}  // namespace commbench
