#include <gtest/gtest.h>

#include <random>

#include "commbench/necessity.hpp"

using namespace commbench;

namespace {

const Cube kDom = Cube::interval(-4.0, 4.0);

KernelSpec hilbert() { return KernelSpec::make(SphereSymbol::pair(1.0, -1.0), 0.0); }

GridFunction step_on(const Cube& dom, int n, const Cube& q1, const std::vector<double>& pieces) {
  return GridFunction::sample(dom, n, [&](const Point& x) {
    if (x[0] < q1.lower(0) || x[0] >= q1.upper(0)) return 0.25 * std::sin(3.0 * x[0]);
    const auto k = static_cast<std::size_t>((x[0] - q1.lower(0)) / q1.side * pieces.size());
    return pieces[std::min(k, pieces.size() - 1)];
  });
}

}  // namespace

TEST(TestPair, OddSymbol) {
  const GridFunction b = GridFunction::sample(Cube::interval(-2.0, 2.0), 256, [](const Point& x) { return x[0]; });
  const TestPair t = build_test_pair(b, Cube::interval(-1.0, 1.0));
  EXPECT_NEAR(t.b_mean, 0.0, 1e-15);
  for (std::size_t k = 0; k < t.phi.size(); ++k) {
    const double x = t.phi.cell_center(k)[0];
    EXPECT_EQ(t.phi[k], x > 0 ? 1.0 : -1.0);
    EXPECT_NEAR(t.b_local[k] * t.phi[k], std::abs(x), 1e-15);
    EXPECT_EQ(t.psi[k], 1.0);
  }
}

TEST(TestPair, SeventyThirtySplit) {
  std::vector<double> v(100, -1.0);
  std::fill(v.begin(), v.begin() + 70, 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(2));
  const GridFunction b(Cube::interval(0.0, 1.0), 100, v);
  const TestPair t = build_test_pair(b, Cube::interval(0.0, 1.0));
  EXPECT_NEAR(t.b_mean, 0.4, 1e-14);
  for (std::size_t k = 0; k < v.size(); ++k) {
    EXPECT_NEAR(t.phi[k], v[k] > 0 ? 0.6 : -1.4, 1e-14);
    EXPECT_GE((v[k] - t.b_mean) * t.phi[k], 0.0);
  }
}

TEST(TestPair, ConstantSymbolGivesZeroPhi) {
  const TestPair t = build_test_pair(GridFunction::constant(kDom, 64, 2.5), Cube::interval(0.0, 1.0));
  for (std::size_t k = 0; k < t.phi.size(); ++k) {
    EXPECT_EQ(t.phi[k], 0.0);
    EXPECT_EQ(t.psi[k], 1.0);
  }
  EXPECT_EQ(pair_oscillation(t), 0.0);
}

TEST(TestPair, InvariantsOnRandomSymbols) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 2 + 1;
    const Cube dom = Cube::make(dim, {0.0, 0.0}, 2.0);
    const int n = dim == 1 ? 128 : 16;
    std::vector<double> v(dim == 1 ? 128 : 256);
    for (double& x : v) x = u(rng);
    const GridFunction b(dom, n, v);
    const TestPair t = build_test_pair(b, Cube::make(dim, {0.25, 0.25}, 1.0));
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < t.phi.size(); ++k) {
      const double d = t.b_local[k] - t.b_mean;
      EXPECT_LE(std::abs(t.phi[k]), 2.0);
      EXPECT_GE(d * t.phi[k], 0.0);
      lhs += d * t.phi[k];
      rhs += std::abs(d);
    }
    EXPECT_NEAR(lhs, rhs, 1e-12 * rhs);
  }
}

TEST(TestPair, UnresolvedCubeRejected) {
  EXPECT_THROW(build_test_pair(GridFunction::constant(kDom, 16, 1.0), Cube::interval(0.0, 0.1)), DomainError);
}

TEST(FindShift, SignKernel) {
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  EXPECT_EQ(s.oscillation, 0.0);
  EXPECT_TRUE(s.rigorous);
  EXPECT_NEAR(s.proxy, (1.0 / s.h_norm) / s.A3, 1e-15);
  EXPECT_LE(s.proxy, 0.5);
  EXPECT_LE(s.xi_bound, s.xi_limit());
  // The proxy alone admits |h| = 4; the rigorous Ξ bound needs one more doubling.
  EXPECT_EQ(s.h_norm, 8.0);
  EXPECT_DOUBLE_EQ(s.C_tilde, 2.0 * s.h_norm / s.A1);
  EXPECT_DOUBLE_EQ(s.lambda_containment, 2.0 * (s.h_norm + 1.0));
}

TEST(FindShift, ZeroSymbolFailsConeCondition) {
  try {
    find_shift(KernelSpec::make(SphereSymbol::pair(0.0, 0.0), 0.0), 0.5, 64);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("kernel fails condition (1)"), std::string::npos);
  }
}

TEST(FindShift, CosineCertifiesWithinSixtyFour) {
  const auto k = KernelSpec::make(SphereSymbol::from_angle(64, [](double t) { return std::cos(t); }), 0.0);
  const ShiftCertificate s = find_shift(k, 0.05, 64);
  EXPECT_LE(s.h_norm, 64.0);
  EXPECT_LE(s.proxy, 0.05);
}

TEST(FindShift, MonotoneInEpsilon) {
  const auto k = KernelSpec::make(SphereSymbol::from_angle(64, [](double t) { return std::cos(t); }), 0.5);
  double prev = 0.0;
  for (double eps : {0.5, 0.2, 0.1, 0.05}) {
    const ShiftCertificate s = find_shift(k, eps, 256);
    EXPECT_GE(s.h_norm, prev) << eps;
    prev = s.h_norm;
  }
}

TEST(FindShift, DecayNotObserved) {
  EXPECT_THROW(find_shift(hilbert(), 1e-6, 16), NumericalError);
}

TEST(PointwiseCertificate, HalfStepSymbol) {
  const Cube q1 = Cube::interval(0.0, 0.25);
  const GridFunction b = step_on(kDom, 16384, q1, {0.5, -0.5});
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  const PointwiseResult r = pointwise_certificate(b, q1, hilbert(), s);
  EXPECT_GE(r.pair.b_local.size(), 512u);
  EXPECT_NEAR(r.lhs, 0.5, 1e-15);
  EXPECT_GT(r.points, 0u);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_GE(r.min_rhs, r.lhs);
}

TEST(PointwiseCertificate, ConstantSymbol) {
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  const PointwiseResult r = pointwise_certificate(GridFunction::constant(kDom, 1024, 1.0), Cube::interval(0.0, 0.25),
                                                  hilbert(), s);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_TRUE(r.violations.empty());
}

TEST(PointwiseCertificate, RandomStepSymbols) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> level(0, 3);
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int l = level(rng);
    const double side = 0.25 / (1 << l);
    const int idx = std::uniform_int_distribution<int>(0, (1 << l) - 1)(rng);
    const Cube q1 = Cube::interval(-0.125 + idx * side, -0.125 + (idx + 1) * side);
    std::vector<double> pieces(8);
    for (double& p : pieces) p = u(rng);
    violations += pointwise_certificate(step_on(kDom, 4096, q1, pieces), q1, hilbert(), s).violations.size();
  }
  EXPECT_EQ(violations, 0u);
}

TEST(PointwiseCertificate, ScaleEquivariant) {
  const Cube q1 = Cube::interval(0.0, 0.25);
  const GridFunction b = step_on(kDom, 4096, q1, {0.3, -0.9, 0.1, 0.7});
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  const PointwiseResult base = pointwise_certificate(b, q1, hilbert(), s);
  for (double c : {-3.0, 0.5}) {
    const PointwiseResult r = pointwise_certificate(b.map([c](double v) { return c * v; }), q1, hilbert(), s);
    EXPECT_NEAR(r.lhs, std::abs(c) * base.lhs, 1e-12 * base.lhs);
    for (std::size_t i = 0; i < r.xs.size(); ++i) {
      const double scale = std::abs(c) * (std::abs(base.g_phi[i]) + std::abs(base.g_psi[i]));
      EXPECT_NEAR(std::abs(r.g_phi[i]) + std::abs(r.g_psi[i]), scale, 1e-10 * scale);
    }
    EXPECT_EQ(r.violations.size(), base.violations.size());
  }
}

TEST(PointwiseCertificate, TranslationEquivariant) {
  const Cube q1 = Cube::interval(0.0, 0.25);
  const GridFunction b = step_on(kDom, 4096, q1, {0.3, -0.9, 0.1, 0.7});
  const auto s0 = b.samples();
  const GridFunction moved(translate(kDom, {1.0, 0.0}), 4096, std::vector<double>(s0.begin(), s0.end()));
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  const PointwiseResult a = pointwise_certificate(b, q1, hilbert(), s);
  const PointwiseResult t = pointwise_certificate(moved, translate(q1, {1.0, 0.0}), hilbert(), s);
  ASSERT_EQ(a.xs.size(), t.xs.size());
  EXPECT_NEAR(a.lhs, t.lhs, 1e-12);
  for (std::size_t i = 0; i < a.xs.size(); ++i) {
    EXPECT_NEAR(a.g_phi[i], t.g_phi[i], 1e-9 * std::max(1.0, std::abs(a.g_phi[i])));
    EXPECT_NEAR(a.g_psi[i], t.g_psi[i], 1e-9 * std::max(1.0, std::abs(a.g_psi[i])));
  }
  EXPECT_EQ(a.violations.size(), t.violations.size());
}

TEST(PointwiseCertificate, EscapingWindowNamesEnlargement) {
  const ShiftCertificate s = find_shift(hilbert(), 0.5, 256);
  try {
    pointwise_certificate(GridFunction::constant(Cube::interval(-1.0, 1.0), 256, 1.0), Cube::interval(0.0, 0.5),
                          hilbert(), s);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("half-side >= 4.5"), std::string::npos) << e.what();
  }
}

TEST(BilinearPointwise, SignSymbol) {
  const auto spec = BilinearFractionalSpec::make(1, 1.0);
  const ShiftCertificate s = find_shift_bilinear(spec, 0.5, 256);
  const Cube q1 = Cube::interval(0.0, 0.125);
  const double rho = q1.side;
  const double half = s.h_norm * rho;
  const Cube dom = Cube::interval(-half - 0.5, half + 0.5);
  const int n = static_cast<int>(std::lround(dom.side / rho)) * 512;
  const GridFunction b = GridFunction::sample(dom, n, [&](const Point& x) { return sgn(x[0] - q1.center[0]); });
  const auto r = bilinear_pointwise_certificate(b, q1, spec, s, 1);
  EXPECT_GE(r.pair.b_local.size(), 512u);
  EXPECT_NEAR(r.lhs, rho, 1e-15);
  EXPECT_TRUE(r.violations.empty());
}

TEST(BilinearPointwise, ConstantSymbolAndSlotTwo) {
  const auto spec = BilinearFractionalSpec::make(1, 1.0);
  const ShiftCertificate s = find_shift_bilinear(spec, 0.5, 256);
  const Cube q1 = Cube::interval(0.0, 0.25);
  const Cube dom = Cube::interval(-8.0, 8.0);
  const auto c = bilinear_pointwise_certificate(GridFunction::constant(dom, 4096, 1.0), q1, spec, s, 1);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_TRUE(c.violations.empty());
  const GridFunction b = GridFunction::sample(dom, 4096, [](const Point& x) { return std::cos(9.0 * x[0]); });
  const GridFunction reflected = GridFunction::sample(dom, 4096, [](const Point& x) { return std::cos(-9.0 * x[0]); });
  const auto one = bilinear_pointwise_certificate(b, q1, spec, s, 1);
  const auto two = bilinear_pointwise_certificate(reflected, q1, spec, s, 2);
  EXPECT_NEAR(one.lhs, two.lhs, 1e-12);
  EXPECT_EQ(one.violations.size(), two.violations.size());
  EXPECT_TRUE(one.violations.empty());
}

TEST(OperatorNormProbe, ConstantSymbolAndMonotone) {
  const Cube root = Cube::interval(-1.0, 1.0);
  std::vector<GridFunction> probes;
  for (const Cube& q : dyadic_family(root, 2)) {
    probes.push_back(GridFunction::constant(q, 32, 1.0));
    probes.push_back(GridFunction::sample(q, 32, [&](const Point& x) { return x[0] < q.center[0] ? 1.0 : -1.0; }));
  }
  probes.push_back(GridFunction::constant(root, 32, 0.0));
  const GridFunction out = GridFunction::constant(root, 64, 0.0);
  const SpaceSpec L2 = SpaceSpec::lebesgue(2.0);
  const CommutatorTask zero{GridFunction::constant(root, 256, 4.0), hilbert()};
  const ProbeResult z = operator_norm_probe(zero, L2, L2, probes, out);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.skipped, 1u);
  const CommutatorTask t{GridFunction::sample(root, 256, [](const Point& x) { return x[0] * x[0]; }), hilbert()};
  const std::vector<GridFunction> half(probes.begin(), probes.begin() + 4);
  EXPECT_LE(operator_norm_probe(t, L2, L2, half, out).value, operator_norm_probe(t, L2, L2, probes, out).value);
}

TEST(OperatorNormProbe, LogSymbolStableUnderRefinement) {
  const Cube root = Cube::interval(-1.0, 1.0);
  const SpaceSpec L2 = SpaceSpec::lebesgue(2.0);
  auto run = [&](int n) {
    const GridFunction b = GridFunction::sample(root, n, [](const Point& x) { return std::log(std::abs(x[0])); });
    std::vector<GridFunction> probes;
    for (const Cube& q : dyadic_family(root, 3)) {
      const int m = static_cast<int>(std::lround(q.side / root.side * n));
      probes.push_back(GridFunction::constant(q, m, 1.0));
      probes.push_back(GridFunction::sample(q, m, [&](const Point& x) { return x[0] < q.center[0] ? 1.0 : -1.0; }));
    }
    return operator_norm_probe(CommutatorTask{b, hilbert()}, L2, L2, probes, GridFunction::constant(root, 256, 0.0))
        .value;
  };
  const double a = run(512), b = run(1024);
  EXPECT_GT(a, 0.0);
  EXPECT_TRUE(std::isfinite(b));
  EXPECT_NEAR(b / a, 1.0, 0.2);
}

TEST(BmoLowerBound, ConstantSymbol) {
  const GridFunction b = GridFunction::constant(kDom, 2048, -1.0);
  const CommutatorTask task{b, hilbert()};
  const auto cert = find_shift(hilbert(), 0.5, 256);
  const auto rep = bmo_lower_bound(b, task, SpaceSpec::lebesgue(2.0), SpaceSpec::lebesgue(2.0),
                                   MuFunctional::lebesgue(), dyadic_family(Cube::interval(-0.25, 0.25), 2), cert);
  EXPECT_EQ(rep.aggregate, 0.0);
  for (const auto& r : rep.records) EXPECT_EQ(r.B, 0.0);
  EXPECT_FALSE(rep.records.empty());
  EXPECT_TRUE(rep.consistent);
}

TEST(BmoLowerBound, LogSymbolBelowDirectNorm) {
  const GridFunction b = GridFunction::sample(kDom, 4096, [](const Point& x) { return std::log(std::abs(x[0])); });
  const CommutatorTask task{b, hilbert()};
  const auto cert = find_shift(hilbert(), 0.5, 256);
  const auto family = dyadic_family(Cube::interval(-0.25, 0.25), 4);
  const auto rep = bmo_lower_bound(b, task, SpaceSpec::lebesgue(2.0), SpaceSpec::lebesgue(2.0),
                                   MuFunctional::lebesgue(), family, cert);
  EXPECT_GT(rep.aggregate, 0.0);
  EXPECT_LE(rep.aggregate, bmo_mu_norm(b, MuFunctional::lebesgue(), family) * (1.0 + 1e-12));
  EXPECT_TRUE(rep.consistent);
  for (const auto& r : rep.records) {
    EXPECT_EQ(r.violations, 0u);
    if (r.certified) EXPECT_LE(r.B, r.certified_bound * (1.0 + 1e-12));
  }
}

TEST(BmoLowerBound, SquareRootSymbolBoundedInLipschitzScale) {
  const GridFunction b = GridFunction::sample(kDom, 4096, [](const Point& x) { return std::sqrt(std::abs(x[0])); });
  const KernelSpec k = KernelSpec::make(SphereSymbol::pair(1.0, 1.0), 0.5);
  const auto cert = find_shift(k, 0.5, 256);
  const auto rep = bmo_lower_bound(b, CommutatorTask{b, k}, SpaceSpec::lebesgue(2.0), SpaceSpec::lebesgue(4.0),
                                   MuFunctional::lip(0.5), dyadic_family(Cube::interval(-0.25, 0.25), 5), cert);
  const double lip = lipschitz_seminorm(b, 0.5);
  EXPECT_LE(lip, 1.0 + 1e-9);
  EXPECT_FALSE(rep.records.empty());
  for (const auto& r : rep.records) EXPECT_LE(r.B, lip);
}

TEST(AffineInvariance, LebesgueOneAndInfinity) {
  // ‖f(a· + c)‖_Z / ‖χ_{Q0}(a· + c)‖_Z does not depend on (a, c) for Z = L¹, L∞.
  const Cube q0 = Cube::make(2, {0.0, 0.0}, 1.0);
  auto f = [](const Point& x) { return std::sin(3.0 * x[0]) * (1.0 + x[1] * x[1]); };
  const int n = 32;
  for (const SpaceSpec& z : {SpaceSpec::lebesgue(1.0), SpaceSpec::lebesgue(kInf)}) {
    const double ref = norm(GridFunction::sample(q0, n, f), z) / norm(GridFunction::constant(q0, n, 1.0), z);
    for (const auto& [a, c] : {std::pair{2.0, Point{0.5, -1.0}}, std::pair{0.125, Point{3.0, 0.25}}}) {
      // Preimage of Q0 under x ↦ a x + c.
      const Cube pre = Cube::make(2, {(q0.center[0] - c[0]) / a, (q0.center[1] - c[1]) / a}, q0.side / a);
      const auto g = GridFunction::sample(pre, n, [&](const Point& x) { return f({a * x[0] + c[0], a * x[1] + c[1]}); });
      const double r = norm(g, z) / norm(GridFunction::constant(pre, n, 1.0), z);
      EXPECT_NEAR(r, ref, 1e-12 * ref);
    }
  }
}
