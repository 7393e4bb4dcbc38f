#pragma once

// [b, T_α] and the bilinear i-th commutator, decomposed (bT(f) - T(bf)) or
// with the combined kernel (b(x) - b(y)) K(x - y).

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/operators.hpp"

namespace commbench {

enum class CommutatorForm { Decomposed, CombinedKernel };

struct CommutatorTask {
  GridFunction b;
  std::variant<KernelSpec, BilinearFractionalSpec> kernel;
  int slot = 1;
  CommutatorForm form = CommutatorForm::CombinedKernel;
  /// Exclusion radius for points inside the support; defaults to one source
  /// cell diameter.
  std::optional<double> exclusion;

  bool is_linear() const { return std::holds_alternative<KernelSpec>(kernel); }
  const KernelSpec& linear() const { return std::get<KernelSpec>(kernel); }
  const BilinearFractionalSpec& bilinear() const { return std::get<BilinearFractionalSpec>(kernel); }
};

struct CommutatorOutput {
  std::vector<double> values;
  double exclusion = 0.0;  // radius used at points inside the support
};

namespace detail {

inline std::vector<double> b_at(const GridFunction& b, const std::vector<Point>& pts) {
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = b.value_at(pts[i]);
  return out;
}

}  // namespace detail

inline CommutatorOutput commutator_apply(const CommutatorTask& task, const GridFunction& f,
                                         const std::vector<Point>& points) {
  if (!task.is_linear()) throw DomainError("linear commutator needs a KernelSpec");
  const KernelSpec& k = task.linear();
  detail::require(task.b.dim() == f.dim() && k.dim() == f.dim(), "dimension mismatch in commutator task");
  CommutatorOutput out;
  out.exclusion = task.exclusion.value_or(f.cell_diameter());
  const std::vector<double> bx = detail::b_at(task.b, points);

  if (task.form == CommutatorForm::Decomposed) {
    for (const Point& x : points)
      if (k.alpha <= 0.0 && f.domain().contains(x))
        throw DomainError("decomposed form is singular near the support for alpha <= 0; use CombinedKernel");
    std::vector<double> bf(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) bf[c] = f[c] == 0.0 ? 0.0 : f[c] * task.b.value_at(f.cell_center(c));
    const GridFunction bfg(f.domain(), f.resolution(), std::move(bf));
    out.values.assign(points.size(), 0.0);
    for (const bool inside : {false, true}) {
      std::vector<std::size_t> idx;
      std::vector<Point> pts;
      for (std::size_t i = 0; i < points.size(); ++i)
        if (f.domain().contains(points[i]) == inside) idx.push_back(i), pts.push_back(points[i]);
      if (pts.empty()) continue;
      const double e = inside ? out.exclusion : 0.0;
      const auto tf = apply_T(k, f, pts, e), tbf = apply_T(k, bfg, pts, e);
      for (std::size_t j = 0; j < idx.size(); ++j) out.values[idx[j]] = bx[idx[j]] * tf[j] - tbf[j];
    }
    return out;
  }

  std::vector<Point> ys;
  std::vector<double> fy, by;
  for (std::size_t c = 0; c < f.size(); ++c)
    if (f[c] != 0.0) {
      ys.push_back(f.cell_center(c));
      fy.push_back(f[c]);
      by.push_back(task.b.value_at(ys.back()));
    }
  out.values.assign(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    const bool inside = f.domain().contains(x);
    if (inside && k.alpha <= 0.0 && out.exclusion < f.cell_diameter() * (1.0 - 1e-9))
      throw NumericalError("PV truncation under-resolved");
    const double cut = inside ? out.exclusion * (1.0 - 1e-9) : 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const Point d = x - ys[j];
      if (inside && norm2(d, f.dim()) <= cut) continue;
      s += (bx[i] - by[j]) * k.kernel(d) * fy[j];
    }
    out.values[i] = s * f.cell_measure();
  }
  return out;
}

/// Combined-kernel double sum with factor (b(x) - b(y_i)); diagonal cell pairs
/// are excluded and counted as in apply_I2.
inline I2Result bilinear_commutator_apply(const CommutatorTask& task, const GridFunction& f1, const GridFunction& f2,
                                          const std::vector<Point>& points) {
  if (task.is_linear()) throw DomainError("bilinear commutator needs a BilinearFractionalSpec");
  if (task.slot != 1 && task.slot != 2) throw DomainError("commutator slot must be 1 or 2");
  const BilinearFractionalSpec& spec = task.bilinear();
  spec.validate();
  struct Src {
    Point y;
    double f;
    double b;
  };
  auto active = [&](const GridFunction& f, bool with_b) {
    std::vector<Src> out;
    for (std::size_t c = 0; c < f.size(); ++c)
      if (f[c] != 0.0) {
        const Point y = f.cell_center(c);
        out.push_back({y, f[c], with_b ? task.b.value_at(y) : 0.0});
      }
    return out;
  };
  const auto a1 = active(f1, task.slot == 1), a2 = active(f2, task.slot == 2);
  const double d1 = f1.cell_diameter(), d2 = f2.cell_diameter();
  const double e = 0.5 * (spec.alpha - 2.0 * spec.dim);
  const double w = f1.cell_measure() * f2.cell_measure();
  const std::vector<double> bx = detail::b_at(task.b, points);
  I2Result r;
  r.values.assign(points.size(), 0.0);
  r.excluded.assign(points.size(), 0);
  auto dist2 = [](const Point& a, const Point& b) {
    const Point d = a - b;
    return d[0] * d[0] + d[1] * d[1];
  };
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& x = points[i];
    double s = 0.0;
    for (const Src& u : a1) {
      const double r1 = dist2(x, u.y);
      const bool near1 = r1 < d1 * d1;
      double inner = 0.0;
      for (const Src& v : a2) {
        const double r2 = dist2(x, v.y);
        if (near1 && r2 < d2 * d2) {
          ++r.excluded[i];
          continue;
        }
        const double diff = bx[i] - (task.slot == 1 ? u.b : v.b);
        inner += diff * v.f * std::pow(r1 + r2, e);
      }
      s += u.f * inner;
    }
    r.values[i] = s * w;
  }
  return r;
}

}  // namespace commbench
