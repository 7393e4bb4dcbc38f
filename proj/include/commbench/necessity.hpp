#pragma once

// Lower bounds for the symbol from a bounded commutator: test pairs, the shift
// search, pointwise certificates and the per-cube BMO_μ chain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "commbench/commutators.hpp"
#include "commbench/error.hpp"
#include "commbench/geometry.hpp"
#include "commbench/operators.hpp"
#include "commbench/spaces.hpp"

namespace commbench {

struct TestPair {
  GridFunction phi;  // (sgn(b - b_mean) - avg sgn) on the cells of Q1
  GridFunction psi;  // indicator of Q1
  Cube base;         // cube spanned by the cells of Q1
  double b_mean = 0.0;
  GridFunction b_local;  // b on the cells of Q1
};

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline TestPair build_test_pair(const GridFunction& b, const Cube& q1) {
  TestPair t;
  t.b_local = restrict_to(b, q1);
  t.base = t.b_local.domain();
  const auto s = t.b_local.samples();
  const bool flat = std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
  if (flat) {
    t.b_mean = s.front();
  } else {
    double sum = 0.0;
    for (double v : s) sum += v;
    t.b_mean = sum / static_cast<double>(s.size());
  }
  std::vector<double> sg(s.size());
  double avg = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) avg += sg[k] = sgn(s[k] - t.b_mean);
  avg /= static_cast<double>(s.size());
  for (double& v : sg) v -= avg;
  t.phi = GridFunction(t.base, t.b_local.resolution(), std::move(sg));
  t.psi = GridFunction::constant(t.base, t.b_local.resolution(), 1.0);
  return t;
}

/// Discrete average of |b - b_mean| over the cells of the pair's cube.
inline double pair_oscillation(const TestPair& t) {
  double s = 0.0;
  for (double v : t.b_local.samples()) s += std::abs(v - t.b_mean);
  return s / static_cast<double>(t.b_local.size());
}

struct ShiftCertificate {
  bool bilinear = false;
  int dim = 1;
  double alpha = 0.0;
  std::vector<Point> shifts;  // h (linear) or (h1, h2) (bilinear), in units of the side of Q1
  double h_norm = 0.0;
  Cone cone;
  double oscillation = 0.0;  // Linf kernel oscillation (or bilinear analogue) at h
  double proxy = 0.0;
  double xi_bound = 0.0;
  double A1 = 0.0, A2 = 1.0, A3 = 0.0, A4 = 0.0;
  double C_tilde = 0.0;
  double lambda_containment = 0.0;
  /// False when only the L1 (directional) oscillation decayed; then the
  /// pointwise Ξ bound is an estimate, not a certificate.
  bool rigorous = true;
  std::string mode = "Linf";

  double xi_limit() const { return std::min(A1 / (2.0 * A4), 1.0); }
  /// Q = Q1 + ρ h^1.
  Cube shifted_cube(const Cube& q1) const { return translate(q1, shifts.front(), q1.side); }
};

namespace detail {

/// sup over u ∈ Q0 + h of ∫_{Q0} |K(u - y) - K(u)| dy, midpoint rule.
inline double kernel_difference_sup(const KernelSpec& k, const Point& h, int n0) {
  const Cube q0 = Cube::make(k.dim(), {0.0, 0.0}, 1.0);
  const GridFunction g = GridFunction::constant(q0, n0, 0.0);
  const auto pts = all_cell_centers(g);
  double sup = 0.0;
  for (const Point& x : pts) {
    const Point u = x + h;
    const double ref = k.kernel(u);
    double s = 0.0;
    for (const Point& y : pts) s += std::abs(k.kernel(u - y) - ref);
    sup = std::max(sup, s * g.cell_measure());
  }
  return sup;
}

inline double angle_between(const Point& a, const Point& b) {
  return std::acos(std::clamp(a[0] * b[0] + a[1] * b[1], -1.0, 1.0));
}

}  // namespace detail

/// Searches |h| = 2, 4, 8, ... <= h_max along the cone centre for the first
/// shift with proxy <= eps_xi whose rigorous Ξ bound is at most
/// min(A1/(2A4), 1).
inline ShiftCertificate find_shift(const KernelSpec& kernel, double eps_xi, double h_max, int n0 = 32) {
  kernel.validate();
  detail::require(eps_xi > 0.0, "eps_xi must be positive");
  const auto cone = lower_upper_cone(kernel.symbol);
  if (!cone) throw DomainError("kernel fails condition (1)");
  const int n = kernel.dim();
  const double sn = std::sqrt(static_cast<double>(n));
  const double e = n - kernel.alpha;
  const double c = cone->lower_abs(), C = cone->upper_abs();

  auto base = [&](double hn) {
    ShiftCertificate s;
    s.dim = n;
    s.alpha = kernel.alpha;
    s.h_norm = hn;
    s.cone = *cone;
    s.A1 = s.A3 = c * std::pow((hn - sn) / (hn + sn), e);
    s.A2 = 1.0;
    s.A4 = C * std::pow(hn / (hn - sn), e);
    s.C_tilde = 2.0 * std::pow(hn, e) / s.A1;
    s.lambda_containment = 2.0 * (hn + sn);
    return s;
  };
  auto fits_cone = [&](double hn, const Point& dir) {
    if (n == 1) return true;
    return detail::angle_between(dir, cone->direction) + std::asin(sn / hn) <= cone->half_width + 1e-12;
  };

  for (double hn = 2.0; hn <= h_max; hn *= 2.0) {
    if (hn <= sn || !fits_cone(hn, cone->direction)) continue;
    ShiftCertificate s = base(hn);
    const Point h = hn * cone->direction;
    s.shifts = {h};
    s.oscillation = kernel_oscillation(kernel.symbol, h, ZMode::Linf, n0);
    s.proxy = (s.A2 / s.A3) * (1.0 / hn + s.oscillation / c);
    s.xi_bound = 2.0 * std::pow(hn, e) / s.A3 * detail::kernel_difference_sup(kernel, h, n0);
    if (s.proxy <= eps_xi && s.xi_bound <= s.xi_limit()) return s;
  }
  // L1 pathway: best direction inside the cone, proxy only.
  for (double hn = 2.0; hn <= h_max; hn *= 2.0) {
    if (hn <= sn) continue;
    double best = std::numeric_limits<double>::infinity();
    Point best_dir{};
    for (const Point& d : cone->directions) {
      if (!fits_cone(hn, d)) continue;
      const double v = kernel_oscillation(kernel.symbol, hn * d, ZMode::L1, n0);
      if (v < best) best = v, best_dir = d;
    }
    if (!std::isfinite(best)) continue;
    ShiftCertificate s = base(hn);
    const Point h = hn * best_dir;
    s.shifts = {h};
    s.oscillation = best;
    s.proxy = (s.A2 / s.A3) * (1.0 / hn + best / c);
    s.xi_bound = 2.0 * std::pow(hn, e) / s.A3 * detail::kernel_difference_sup(kernel, h, n0);
    s.rigorous = false;
    s.mode = "L1";
    if (s.proxy <= eps_xi) return s;
  }
  throw NumericalError("oscillation decay not observed");
}

/// Bilinear analogue along the diagonal direction with h1 = h2.
inline ShiftCertificate find_shift_bilinear(const BilinearFractionalSpec& spec, double eps_xi, double h_max,
                                            int n0 = 16) {
  spec.validate();
  detail::require(eps_xi > 0.0, "eps_xi must be positive");
  const int n = spec.dim;
  const double s2 = std::sqrt(2.0 * n);
  const double e = 2.0 * n - spec.alpha;
  const Point u = n == 1 ? Point{1.0, 0.0} : Point{std::sqrt(0.5), std::sqrt(0.5)};
  const Cube q0 = Cube::make(n, {0.0, 0.0}, 1.0);
  for (double hn = 2.0; hn <= h_max; hn *= 2.0) {
    if (hn <= s2) continue;
    ShiftCertificate s;
    s.bilinear = true;
    s.dim = n;
    s.alpha = spec.alpha;
    s.h_norm = hn;
    s.cone.dim = n;
    s.cone.direction = u;
    s.cone.c = s.cone.C = 1.0;
    s.cone.directions = {u};
    const Point h = (hn / std::sqrt(2.0)) * u;
    s.shifts = {h, h};
    s.A1 = s.A3 = std::pow((hn - s2) / (hn + s2), e);
    s.A2 = 1.0;
    s.A4 = std::pow(hn / (hn - s2), e);
    s.C_tilde = 2.0 * std::pow(hn, e) / s.A1;
    s.lambda_containment = 2.0 * (hn + s2);
    s.mode = "bilinear-Linf";
    s.oscillation = bilinear_kernel_oscillation(spec, {h, h}, q0, n0);
    s.proxy = (s.A2 / s.A3) * (1.0 / hn + s.oscillation);
    s.xi_bound = 2.0 * s.oscillation / s.A3;
    if (s.proxy <= eps_xi && s.xi_bound <= s.xi_limit()) return s;
  }
  throw NumericalError("oscillation decay not observed");
}

struct Violation {
  Point x;
  double lhs;
  double rhs;
};

struct PointwiseResult {
  TestPair pair;
  Cube target;      // Q = Q1 + ρh
  double lhs = 0.0;  // |Q1|^{α/n} avg |b - b_Q1|
  std::size_t points = 0;
  double min_rhs = std::numeric_limits<double>::infinity();
  std::vector<Violation> violations;
  std::vector<double> g_phi, g_psi;  // commutator values at the points
  std::vector<Point> xs;
  bool certified() const { return violations.empty(); }
};

namespace detail {

inline void require_inside(const GridFunction& b, const Cube& q) {
  if (b.domain().contains(q)) return;
  double need = 0.0;
  for (int a = 0; a < b.dim(); ++a) {
    need = std::max(need, std::abs(q.lower(a) - b.domain().center[a]));
    need = std::max(need, std::abs(q.upper(a) - b.domain().center[a]));
  }
  std::ostringstream os;
  os << "shifted cube escapes the grid of b; enlarge the domain to half-side >= " << need;
  throw DomainError(os.str());
}

inline void tally(PointwiseResult& r, double c_tilde) {
  r.points = r.xs.size();
  for (std::size_t i = 0; i < r.xs.size(); ++i) {
    const double rhs = c_tilde * (std::abs(r.g_phi[i]) + std::abs(r.g_psi[i]));
    r.min_rhs = std::min(r.min_rhs, rhs);
    if (r.lhs > rhs * (1.0 + 1e-12)) r.violations.push_back({r.xs[i], r.lhs, rhs});
  }
}

}  // namespace detail

inline PointwiseResult pointwise_certificate(const GridFunction& b, const Cube& q1, const KernelSpec& kernel,
                                             const ShiftCertificate& cert) {
  detail::require(!cert.bilinear && cert.dim == kernel.dim(), "certificate does not match the kernel");
  PointwiseResult r;
  r.pair = build_test_pair(b, q1);
  r.target = cert.shifted_cube(r.pair.base);
  detail::require_inside(b, r.target);
  r.xs = cell_centers_in(b, r.target);
  const CommutatorTask task{b, kernel, 1, CommutatorForm::CombinedKernel, std::nullopt};
  r.g_phi = commutator_apply(task, r.pair.phi, r.xs).values;
  r.g_psi = commutator_apply(task, r.pair.psi, r.xs).values;
  r.lhs = std::pow(r.pair.base.side, kernel.alpha) * pair_oscillation(r.pair);
  detail::tally(r, cert.C_tilde);
  return r;
}

struct BilinearPointwiseResult : PointwiseResult {
  Cube other;  // support of the slot-j test function
  GridFunction other_indicator;
  int slot = 1;
};

inline BilinearPointwiseResult bilinear_pointwise_certificate(const GridFunction& b, const Cube& q1,
                                                              const BilinearFractionalSpec& spec,
                                                              const ShiftCertificate& cert, int slot = 1) {
  detail::require(cert.bilinear && cert.shifts.size() == 2, "certificate is not bilinear");
  detail::require(slot == 1 || slot == 2, "commutator slot must be 1 or 2");
  BilinearPointwiseResult r;
  r.slot = slot;
  r.pair = build_test_pair(b, q1);
  const double rho = r.pair.base.side;
  const Point hi = cert.shifts[slot - 1], hj = cert.shifts[2 - slot];
  r.target = translate(r.pair.base, hi, rho);
  r.other = translate(r.target, hj, -rho);
  if (!r.target.interior_disjoint(r.pair.base) || !r.target.interior_disjoint(r.other))
    throw DomainError("shifted cubes overlap");
  detail::require_inside(b, r.target);
  r.other_indicator = GridFunction::constant(r.other, r.pair.b_local.resolution(), 1.0);
  r.xs = cell_centers_in(b, r.target);
  const CommutatorTask task{b, spec, slot, CommutatorForm::CombinedKernel, std::nullopt};
  auto run = [&](const GridFunction& fi) {
    return slot == 1 ? bilinear_commutator_apply(task, fi, r.other_indicator, r.xs).values
                     : bilinear_commutator_apply(task, r.other_indicator, fi, r.xs).values;
  };
  r.g_phi = run(r.pair.phi);
  r.g_psi = run(r.pair.psi);
  r.lhs = std::pow(rho, spec.alpha) * pair_oscillation(r.pair);
  detail::tally(r, cert.C_tilde);
  return r;
}

struct ProbeResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;  // probes with zero X-norm
};

/// max over probes of ‖[b,T]f‖_Y / ‖f‖_X, the output evaluated at the cell
/// centres of `output_grid` (its samples are ignored).
inline ProbeResult operator_norm_probe(const CommutatorTask& task, const SpaceSpec& X, const SpaceSpec& Y,
                                       const std::vector<GridFunction>& probes, const GridFunction& output_grid,
                                       const std::vector<Cube>* family = nullptr) {
  ProbeResult r;
  const auto pts = all_cell_centers(output_grid);
  for (const GridFunction& f : probes) {
    const double nx = norm(f, X, family);
    if (!(nx > 0.0)) {
      ++r.skipped;
      continue;
    }
    auto vals = commutator_apply(task, f, pts).values;
    const GridFunction out(output_grid.domain(), output_grid.resolution(), std::move(vals));
    r.value = std::max(r.value, norm(out, Y, family) / nx);
    ++r.used;
  }
  return r;
}

/// Bilinear version: probes are pairs, ratio ‖[b,T]_i(f1,f2)‖_Y / (‖f1‖_X1 ‖f2‖_X2).
inline ProbeResult bilinear_operator_norm_probe(const CommutatorTask& task, const SpaceSpec& X1,
                                                const SpaceSpec& X2, const SpaceSpec& Y,
                                                const std::vector<std::pair<GridFunction, GridFunction>>& probes,
                                                const GridFunction& output_grid) {
  ProbeResult r;
  const auto pts = all_cell_centers(output_grid);
  for (const auto& [f1, f2] : probes) {
    const double nx = norm(f1, X1) * norm(f2, X2);
    if (!(nx > 0.0)) {
      ++r.skipped;
      continue;
    }
    auto vals = bilinear_commutator_apply(task, f1, f2, pts).values;
    const GridFunction out(output_grid.domain(), output_grid.resolution(), std::move(vals));
    r.value = std::max(r.value, norm(out, Y) / nx);
    ++r.used;
  }
  return r;
}

struct CubeRecord {
  Cube cube;
  double B = 0.0;                // μ(Q1)^{-1} ∫_{Q1} |b - b_Q1|
  double certified_bound = 0.0;  // upper bound for B from the window norms
  double chain_factor = 0.0;     // F(Q1): B <= F(Q1) ‖[b,T]‖
  double window_ratio = 0.0;     // lower bound for ‖[b,T]‖ from this cube's test functions
  std::size_t violations = 0;
  bool certified = false;
};

struct LowerBoundReport {
  ShiftCertificate certificate;
  std::vector<CubeRecord> records;
  std::size_t skipped = 0;        // cubes whose window leaves the grid or is unresolved
  double aggregate = 0.0;         // max B over certified cubes
  double constant_chain = 0.0;    // max F over certified cubes
  double operator_norm_proxy = 0.0;
  bool consistent = true;         // aggregate <= constant_chain * operator_norm_proxy
};

namespace detail {

/// Values at the cells of `b` inside q, as a grid function on their hull.
/// Returns nullopt when the cells do not form a square block.
inline std::optional<GridFunction> window(const GridFunction& b, const Cube& q, const std::vector<double>& values) {
  const CellRange r = b.cells_in(q);
  if (r.count(0) < 2 || (b.dim() == 2 && r.count(1) != r.count(0))) return std::nullopt;
  return GridFunction(hull_of(b, r), r.count(0), values);
}

inline double space_norm(const GridFunction& f, const SpaceSpec& s) {
  if (s.kind == SpaceKind::Morrey) {
    const auto fam = dyadic_family(f.domain(), 3);
    return norm(f, s, fam);
  }
  return norm(f, s);
}

}  // namespace detail

/// Runs the per-cube chain for a linear commutator. `external_probe`, when
/// given, is folded into the operator-norm proxy.
inline LowerBoundReport bmo_lower_bound(const GridFunction& b, const CommutatorTask& task, const SpaceSpec& X,
                                        const SpaceSpec& Y, const MuFunctional& mu, const std::vector<Cube>& family,
                                        const ShiftCertificate& cert,
                                        std::optional<double> external_probe = std::nullopt) {
  detail::require(task.is_linear(), "bmo_lower_bound needs a linear commutator task");
  detail::require(!family.empty(), "cube family must be nonempty");
  const KernelSpec& k = task.linear();
  const double n = k.dim();
  const double KY = quasi_triangle_constant(Y);
  LowerBoundReport rep;
  rep.certificate = cert;
  for (const Cube& q1 : family) {
    PointwiseResult pw;
    try {
      pw = pointwise_certificate(b, q1, k, cert);
    } catch (const DomainError&) {
      ++rep.skipped;
      continue;
    }
    std::vector<double> both(pw.xs.size());
    for (std::size_t i = 0; i < both.size(); ++i) both[i] = std::abs(pw.g_phi[i]) + std::abs(pw.g_psi[i]);
    const auto w_both = detail::window(b, pw.target, both);
    const auto w_phi = detail::window(b, pw.target, pw.g_phi);
    const auto w_psi = detail::window(b, pw.target, pw.g_psi);
    if (!w_both) {
      ++rep.skipped;
      continue;
    }
    const GridFunction chi = GridFunction::constant(w_both->domain(), w_both->resolution(), 1.0);
    const Cube& base = pw.pair.base;
    const double m = mu(base);
    const double osc_int = pair_oscillation(pw.pair) * base.measure();
    const double chiY = detail::space_norm(chi, Y);
    const double scale = std::pow(base.measure(), 1.0 - k.alpha / n) / (m * chiY);
    const double nphi = detail::space_norm(pw.pair.phi, X), npsi = detail::space_norm(pw.pair.psi, X);
    const double gphi = detail::space_norm(*w_phi, Y), gpsi = detail::space_norm(*w_psi, Y);

    CubeRecord rec;
    rec.cube = base;
    rec.B = osc_int / m;
    rec.violations = pw.violations.size();
    rec.certified_bound = cert.C_tilde * scale * detail::space_norm(*w_both, Y);
    rec.chain_factor = cert.C_tilde * KY * (nphi + npsi) * scale;
    rec.window_ratio = std::max(nphi > 0 ? gphi / nphi : 0.0, gpsi / npsi);
    rec.certified = pw.certified() && rec.B <= rec.certified_bound * (1.0 + 1e-12);
    rep.records.push_back(rec);
    if (rec.certified) {
      rep.aggregate = std::max(rep.aggregate, rec.B);
      rep.constant_chain = std::max(rep.constant_chain, rec.chain_factor);
    }
    rep.operator_norm_proxy = std::max(rep.operator_norm_proxy, rec.window_ratio);
  }
  if (external_probe) rep.operator_norm_proxy = std::max(rep.operator_norm_proxy, *external_probe);
  rep.consistent = rep.aggregate <= rep.constant_chain * rep.operator_norm_proxy * (1.0 + 1e-9);
  return rep;
}

}  // namespace commbench
