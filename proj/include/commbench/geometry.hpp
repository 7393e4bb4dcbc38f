#pragma once

// Cubes, cell-centred grids and midpoint-rule integration. Every other module
// consumes these types; nothing here allocates shared state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "commbench/error.hpp"

namespace commbench {

/// A point of R^1 or R^2. In one dimension the second coordinate is ignored
/// and kept at zero.
using Point = std::array<double, 2>;

inline double norm2(const Point& p, int dim) {
  return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

/// Axis-parallel cube (interval when dim == 1).
struct Cube {
  int dim = 1;
  Point center{0.0, 0.0};
  double side = 1.0;

  static Cube make(int dim, Point center, double side) {
    detail::require(dim == 1 || dim == 2, "cube dimension must be 1 or 2");
    detail::require(side > 0.0 && std::isfinite(side), "cube side must be positive");
    if (dim == 1) center[1] = 0.0;
    return Cube{dim, center, side};
  }
  static Cube interval(double lo, double hi) { return make(1, {0.5 * (lo + hi), 0.0}, hi - lo); }
  static Cube square(double x0, double y0, double side) {
    return make(2, {x0 + 0.5 * side, y0 + 0.5 * side}, side);
  }

  double measure() const { return dim == 1 ? side : side * side; }
  double lower(int axis) const { return center[axis] - 0.5 * side; }
  double upper(int axis) const { return center[axis] + 0.5 * side; }

  /// Closed containment with an absolute slack `tol`.
  bool contains(const Point& p, double tol = 0.0) const {
    for (int a = 0; a < dim; ++a)
      if (p[a] < lower(a) - tol || p[a] > upper(a) + tol) return false;
    return true;
  }
  bool contains(const Cube& other, double tol = 1e-12) const {
    for (int a = 0; a < dim; ++a)
      if (other.lower(a) < lower(a) - tol || other.upper(a) > upper(a) + tol) return false;
    return true;
  }
  /// True when the interiors do not meet.
  bool interior_disjoint(const Cube& other, double tol = 1e-12) const {
    for (int a = 0; a < dim; ++a)
      if (other.upper(a) <= lower(a) + tol || other.lower(a) >= upper(a) - tol) return true;
    return false;
  }

  friend bool operator==(const Cube&, const Cube&) = default;
};

inline Cube translate(const Cube& q, const Point& h, double scale = 1.0) {
  Cube out = q;
  out.center[0] += scale * h[0];
  if (q.dim == 2) out.center[1] += scale * h[1];
  return out;
}

inline Cube dilate(const Cube& q, double lambda) {
  detail::require(lambda > 0.0, "dilation factor must be positive");
  Cube out = q;
  out.side *= lambda;
  return out;
}

/// All congruent dyadic subcubes of `root` for levels 0..depth, level by level,
/// lexicographic (x fastest) within a level.
inline std::vector<Cube> dyadic_family(const Cube& root, int depth) {
  detail::require(depth >= 0, "dyadic depth must be nonnegative");
  std::vector<Cube> out;
  for (int k = 0; k <= depth; ++k) {
    const long per_axis = 1L << k;
    const double s = root.side / static_cast<double>(per_axis);
    const long ny = root.dim == 2 ? per_axis : 1;
    for (long j = 0; j < ny; ++j)
      for (long i = 0; i < per_axis; ++i) {
        Point c{root.lower(0) + (static_cast<double>(i) + 0.5) * s, 0.0};
        if (root.dim == 2) c[1] = root.lower(1) + (static_cast<double>(j) + 0.5) * s;
        out.push_back(Cube{root.dim, c, s});
      }
  }
  return out;
}

/// Dyadic family plus, for levels >= 1, the translates by half a side along
/// every nonempty subset of axes that stay inside `root`.
inline std::vector<Cube> dyadic_family_with_half_shifts(const Cube& root, int depth) {
  std::vector<Cube> out = dyadic_family(root, depth);
  const std::size_t base = out.size();
  const int masks = root.dim == 1 ? 2 : 4;
  for (std::size_t n = 0; n < base; ++n) {
    const Cube q = out[n];
    if (q.side >= root.side) continue;
    for (int m = 1; m < masks; ++m) {
      Point h{(m & 1) ? 0.5 : 0.0, (m & 2) ? 0.5 : 0.0};
      Cube t = translate(q, h, q.side);
      if (root.contains(t)) out.push_back(t);
    }
  }
  return out;
}

/// Half-open index range [lo, hi) per axis.
struct CellRange {
  int dim = 1;
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{0, 1};

  int count(int axis) const { return std::max(0, hi[axis] - lo[axis]); }
  std::size_t size() const {
    return static_cast<std::size_t>(count(0)) * static_cast<std::size_t>(dim == 2 ? count(1) : 1);
  }
  bool empty() const { return size() == 0; }
};

/// A real function sampled at the cell centres of a uniform N^dim grid on a cube.
class GridFunction {
 public:
  GridFunction() = default;

  GridFunction(Cube domain, int resolution, std::vector<double> samples)
      : domain_(domain), n_(resolution), samples_(std::move(samples)) {
    detail::require(domain_.dim == 1 || domain_.dim == 2, "grid dimension must be 1 or 2");
    detail::require(n_ >= 2, "grid resolution must be at least 2");
    detail::require(samples_.size() == expected_size(), "sample count does not match resolution");
    for (double v : samples_) detail::require(std::isfinite(v), "grid samples must be finite");
  }

  template <class F>
  static GridFunction sample(const Cube& domain, int resolution, F&& f) {
    detail::require(resolution >= 2, "grid resolution must be at least 2");
    GridFunction g;
    g.domain_ = domain;
    g.n_ = resolution;
    g.samples_.resize(g.expected_size());
    for (std::size_t k = 0; k < g.samples_.size(); ++k) g.samples_[k] = f(g.cell_center(k));
    return GridFunction(domain, resolution, std::move(g.samples_));
  }

  static GridFunction constant(const Cube& domain, int resolution, double value) {
    return sample(domain, resolution, [value](const Point&) { return value; });
  }

  const Cube& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  int resolution() const { return n_; }
  std::size_t size() const { return samples_.size(); }
  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t k) const { return samples_[k]; }

  double cell_side() const { return domain_.side / n_; }
  double cell_measure() const { return dim() == 1 ? cell_side() : cell_side() * cell_side(); }
  double cell_diameter() const { return dim() == 1 ? cell_side() : std::sqrt(2.0) * cell_side(); }

  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * static_cast<std::size_t>(j);
  }
  Point cell_center(std::size_t k) const {
    const int i = static_cast<int>(k % static_cast<std::size_t>(n_));
    const int j = dim() == 2 ? static_cast<int>(k / static_cast<std::size_t>(n_)) : 0;
    return cell_center(i, j);
  }
  Point cell_center(int i, int j) const {
    const double h = cell_side();
    Point c{domain_.lower(0) + (i + 0.5) * h, 0.0};
    if (dim() == 2) c[1] = domain_.lower(1) + (j + 0.5) * h;
    return c;
  }

  /// Index of the cell containing `p` (closed domain), if any.
  std::optional<std::size_t> locate(const Point& p) const {
    const double h = cell_side();
    std::array<int, 2> ij{0, 0};
    for (int a = 0; a < dim(); ++a) {
      const double t = (p[a] - domain_.lower(a)) / h;
      if (t < -1e-9 || t > n_ + 1e-9) return std::nullopt;
      ij[a] = std::clamp(static_cast<int>(std::floor(t)), 0, n_ - 1);
    }
    return index(ij[0], ij[1]);
  }

  /// Piecewise-constant evaluation; throws outside the domain.
  double value_at(const Point& p) const {
    auto k = locate(p);
    if (!k) throw DomainError("point outside the sampled domain of a grid function");
    return samples_[*k];
  }

  /// Cells whose centres lie in the closed cube `q`.
  CellRange cells_in(const Cube& q) const {
    CellRange r;
    r.dim = dim();
    const double h = cell_side();
    for (int a = 0; a < dim(); ++a) {
      const double lo = (q.lower(a) - domain_.lower(a)) / h - 0.5;
      const double hi = (q.upper(a) - domain_.lower(a)) / h - 0.5;
      r.lo[a] = std::max(0, static_cast<int>(std::ceil(lo - 1e-9)));
      r.hi[a] = std::min(n_, static_cast<int>(std::floor(hi + 1e-9)) + 1);
    }
    if (dim() == 1) r.lo[1] = 0, r.hi[1] = 1;
    return r;
  }

  template <class F>
  void for_each_cell(const CellRange& r, F&& f) const {
    for (int j = r.lo[1]; j < r.hi[1]; ++j)
      for (int i = r.lo[0]; i < r.hi[0]; ++i) f(index(i, j));
  }

  template <class F>
  GridFunction map(F&& f) const {
    std::vector<double> out(samples_.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(samples_[k]);
    return GridFunction(domain_, n_, std::move(out));
  }

 private:
  std::size_t expected_size() const {
    const auto n = static_cast<std::size_t>(n_);
    return domain_.dim == 1 ? n : n * n;
  }

  Cube domain_{};
  int n_ = 0;
  std::vector<double> samples_;
};

/// Midpoint rule: sum of samples times cell measure.
inline double integrate(const GridFunction& f) {
  double s = 0.0;
  for (double v : f.samples()) s += v;
  return s * f.cell_measure();
}

/// The cube spanned exactly by a range of cells.
inline Cube hull_of(const GridFunction& f, const CellRange& r) {
  const double h = f.cell_side();
  Point c{f.domain().lower(0) + 0.5 * (r.lo[0] + r.hi[0]) * h, 0.0};
  if (f.dim() == 2) c[1] = f.domain().lower(1) + 0.5 * (r.lo[1] + r.hi[1]) * h;
  return Cube{f.dim(), c, r.count(0) * h};
}

/// Restriction of `f` to the cells whose centres lie in `q`, as a grid function
/// on the cell-aligned cube spanned by those cells. Requires a square block of
/// at least two cells per axis.
inline GridFunction restrict_to(const GridFunction& f, const Cube& q) {
  const CellRange r = f.cells_in(q);
  const int m = r.count(0);
  if (m < 2 || (f.dim() == 2 && r.count(1) < 2))
    throw DomainError("cube is not resolved by the grid (fewer than 2 cells per axis)");
  if (f.dim() == 2 && r.count(1) != m)
    throw DomainError("cube does not cover a square block of grid cells");
  std::vector<double> out;
  out.reserve(r.size());
  f.for_each_cell(r, [&](std::size_t k) { out.push_back(f[k]); });
  return GridFunction(hull_of(f, r), m, std::move(out));
}

/// Midpoint integral of `f` over the cells whose centres lie in `q`.
inline double integrate_over(const GridFunction& f, const Cube& q) {
  double s = 0.0;
  f.for_each_cell(f.cells_in(q), [&](std::size_t k) { s += f[k]; });
  return s * f.cell_measure();
}

/// Cell centres of `f` lying in `q`, in storage order.
inline std::vector<Point> cell_centers_in(const GridFunction& f, const Cube& q) {
  std::vector<Point> out;
  const CellRange r = f.cells_in(q);
  out.reserve(r.size());
  f.for_each_cell(r, [&](std::size_t k) { out.push_back(f.cell_center(k)); });
  return out;
}

inline std::vector<Point> all_cell_centers(const GridFunction& f) {
  std::vector<Point> out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f.cell_center(k);
  return out;
}

}  // namespace commbench
