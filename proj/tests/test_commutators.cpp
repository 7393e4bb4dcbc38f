#include <gtest/gtest.h>

#include <random>

#include "commbench/commutators.hpp"

using namespace commbench;

namespace {

const Cube kBig = Cube::interval(-8.0, 8.0);

CommutatorTask linear_task(GridFunction b, KernelSpec k, CommutatorForm form = CommutatorForm::CombinedKernel) {
  CommutatorTask t{std::move(b), std::move(k)};
  t.form = form;
  return t;
}

KernelSpec hilbert() { return KernelSpec::make(SphereSymbol::pair(1.0, -1.0), 0.0); }
KernelSpec cos2(double alpha) {
  return KernelSpec::make(SphereSymbol::from_angle(64, [](double t) { return std::cos(2.0 * t); }), alpha);
}

GridFunction identity_b(const Cube& dom, int n) {
  return GridFunction::sample(dom, n, [](const Point& x) { return x[0]; });
}

}  // namespace

TEST(Commutator, ConstantSymbolVanishes) {
  const GridFunction f = GridFunction::sample(Cube::interval(0.0, 1.0), 128, [](const Point& x) { return 1.0 + x[0]; });
  const GridFunction b = GridFunction::constant(kBig, 1024, 3.5);
  const std::vector<Point> far{{2.0, 0.0}, {-3.0, 0.0}};
  for (auto form : {CommutatorForm::Decomposed, CommutatorForm::CombinedKernel})
    for (double v : commutator_apply(linear_task(b, hilbert(), form), f, far).values) EXPECT_NEAR(v, 0.0, 1e-14);
  for (double v : commutator_apply(linear_task(b, hilbert()), f, {{0.5, 0.0}, {0.1, 0.0}}).values) EXPECT_EQ(v, 0.0);
}

TEST(Commutator, FormsAgreeInFarField) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> bv(512);
  for (double& x : bv) x = u(rng);
  const GridFunction b(kBig, 512, bv);
  const GridFunction f = GridFunction::constant(Cube::interval(0.0, 1.0), 64, 1.0);
  for (double alpha : {0.0, 0.5}) {
    const KernelSpec k = KernelSpec::make(SphereSymbol::pair(1.0, -1.0), alpha);
    const std::vector<Point> pts{{3.0, 0.0}, {-2.0, 0.0}, {6.5, 0.0}};
    const auto d = commutator_apply(linear_task(b, k, CommutatorForm::Decomposed), f, pts).values;
    const auto c = commutator_apply(linear_task(b, k), f, pts).values;
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(d[i], c[i], 1e-10 * std::max(1.0, std::abs(c[i])));
  }
}

TEST(Commutator, DecomposedRejectsNearField) {
  const GridFunction f = GridFunction::constant(Cube::interval(0.0, 1.0), 64, 1.0);
  EXPECT_THROW(commutator_apply(linear_task(identity_b(kBig, 256), hilbert(), CommutatorForm::Decomposed), f,
                                {{0.5, 0.0}}),
               DomainError);
  CommutatorTask t = linear_task(identity_b(kBig, 256), hilbert());
  t.exclusion = 1e-4;
  EXPECT_THROW(commutator_apply(t, f, {{0.5, 0.0}}), NumericalError);
}

TEST(Commutator, IdentitySymbolClosedForm) {
  // b(x) = x against the Hilbert kernel: the integrand collapses to 1.
  const GridFunction f = GridFunction::constant(Cube::interval(0.0, 1.0), 4096, 1.0);
  const GridFunction b = identity_b(Cube::interval(-4.0, 4.0), 8192);
  const auto r = commutator_apply(linear_task(b, hilbert()), f, {{2.0 + 1.0 / 2048.0, 0.0}});
  EXPECT_NEAR(r.values[0], 1.0, 1e-3);
}

TEST(Commutator, InvariantUnderAddedConstantAndOddInB) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> bv(256);
  for (double& x : bv) x = u(rng);
  const GridFunction b(kBig, 256, bv);
  const GridFunction f = GridFunction::sample(Cube::interval(-1.0, 1.0), 64, [](const Point& x) { return x[0]; });
  const std::vector<Point> pts{{0.3, 0.0}, {-0.7, 0.0}, {4.0, 0.0}};
  const auto base = commutator_apply(linear_task(b, hilbert()), f, pts).values;
  const auto shifted =
      commutator_apply(linear_task(b.map([](double x) { return x + 7.0; }), hilbert()), f, pts).values;
  const auto neg = commutator_apply(linear_task(b.map([](double x) { return -x; }), hilbert()), f, pts).values;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(shifted[i], base[i], 1e-11 * std::max(1.0, std::abs(base[i])));
    EXPECT_EQ(neg[i], -base[i]);
  }
}

TEST(Commutator, LinearInF) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Cube q = Cube::square(0.0, 0.0, 1.0);
  std::vector<double> a(256), c(256), s(256);
  for (int k = 0; k < 256; ++k) a[k] = u(rng), c[k] = u(rng), s[k] = a[k] - 2.5 * c[k];
  const GridFunction fa(q, 16, a), fc(q, 16, c), fs(q, 16, s);
  const GridFunction b = GridFunction::sample(Cube::square(-4.0, -4.0, 8.0), 128,
                                              [](const Point& x) { return std::sin(x[0]) + x[1] * x[1]; });
  const CommutatorTask t = linear_task(b, cos2(0.5));
  const std::vector<Point> pts{{0.5, 0.5}, {2.0, -1.0}};
  const auto va = commutator_apply(t, fa, pts).values, vc = commutator_apply(t, fc, pts).values,
             vs = commutator_apply(t, fs, pts).values;
  for (std::size_t i = 0; i < pts.size(); ++i)
    EXPECT_NEAR(vs[i], va[i] - 2.5 * vc[i], 1e-12 * (std::abs(va[i]) + 2.5 * std::abs(vc[i])));
}

TEST(Commutator, LipschitzSymbolTamesOrderMinusOne) {
  const Cube q = Cube::square(0.0, 0.0, 1.0);
  const GridFunction f = GridFunction::constant(q, 64, 1.0);
  const GridFunction b = GridFunction::sample(Cube::square(-1.0, -1.0, 3.0), 192,
                                              [](const Point& x) { return x[0] + 0.5 * x[1]; });
  CommutatorTask t = linear_task(b, cos2(-1.0));
  const Point x{0.3 + 1.0 / 128.0, 0.6 + 1.0 / 128.0};
  t.exclusion = 4.0 * f.cell_diameter();
  const double coarse = commutator_apply(t, f, {x}).values[0];
  t.exclusion = 2.0 * f.cell_diameter();
  const double fine = commutator_apply(t, f, {x}).values[0];
  EXPECT_TRUE(std::isfinite(fine));
  EXPECT_LE(std::abs(fine), 2.0 * std::abs(coarse) + 1e-12);
  EXPECT_GE(std::abs(fine), 0.5 * std::abs(coarse) - 1e-12);
}

TEST(BilinearCommutator, ConstantSymbolVanishes) {
  const GridFunction f = GridFunction::constant(Cube::interval(0.0, 1.0), 64, 1.0);
  CommutatorTask t{GridFunction::constant(kBig, 512, -2.0), BilinearFractionalSpec::make(1, 1.0)};
  for (int slot : {1, 2}) {
    t.slot = slot;
    for (double v : bilinear_commutator_apply(t, f, f, {{4.0, 0.0}, {0.5, 0.0}}).values) EXPECT_EQ(v, 0.0);
  }
}

TEST(BilinearCommutator, SlotsAgreeOnEqualFunctions) {
  const GridFunction f = GridFunction::sample(Cube::interval(0.0, 1.0), 64, [](const Point& x) { return 1.0 + x[0]; });
  CommutatorTask t{identity_b(kBig, 1024), BilinearFractionalSpec::make(1, 1.0)};
  const std::vector<Point> pts{{4.0, 0.0}, {0.25, 0.0}, {-1.5, 0.0}};
  t.slot = 1;
  const auto a = bilinear_commutator_apply(t, f, f, pts);
  t.slot = 2;
  const auto c = bilinear_commutator_apply(t, f, f, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(a.values[i], c.values[i], 1e-12 * std::abs(a.values[i]));
  EXPECT_EQ(a.excluded, c.excluded);
  t.slot = 3;
  EXPECT_THROW(bilinear_commutator_apply(t, f, f, pts), DomainError);
}

TEST(BilinearCommutator, IdentitySymbolIntervalOracle) {
  const GridFunction chi = GridFunction::constant(Cube::interval(0.0, 1.0), 256, 1.0);
  CommutatorTask t{identity_b(kBig, 4096), BilinearFractionalSpec::make(1, 1.0)};
  const double v = bilinear_commutator_apply(t, chi, chi, {{4.0 + 1.0 / 512.0, 0.0}}).values[0];
  // b(x) - b(y₁) in [3, 4]; kernel between (4² + 4²)^{-1/2} and (3² + 3²)^{-1/2}.
  EXPECT_GE(v, 3.0 / std::sqrt(32.0));
  EXPECT_LE(v, 4.0 / std::sqrt(18.0));
}

TEST(BilinearCommutator, LinearInEachArgument) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Cube q = Cube::interval(0.0, 1.0);
  std::vector<double> a(64), c(64), s(64);
  for (int k = 0; k < 64; ++k) a[k] = u(rng), c[k] = u(rng), s[k] = a[k] + 3.0 * c[k];
  const GridFunction fa(q, 64, a), fc(q, 64, c), fs(q, 64, s), g = GridFunction::constant(q, 64, 1.0);
  CommutatorTask t{GridFunction::sample(kBig, 1024, [](const Point& x) { return std::cos(x[0]); }),
                   BilinearFractionalSpec::make(1, 1.5)};
  const std::vector<Point> pts{{3.0, 0.0}, {0.4, 0.0}};
  for (int slot : {1, 2}) {
    t.slot = slot;
    const auto va = bilinear_commutator_apply(t, fa, g, pts).values, vc = bilinear_commutator_apply(t, fc, g, pts).values,
               vs = bilinear_commutator_apply(t, fs, g, pts).values;
    const auto wa = bilinear_commutator_apply(t, g, fa, pts).values, ws = bilinear_commutator_apply(t, g, fs, pts).values,
               wc = bilinear_commutator_apply(t, g, fc, pts).values;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_NEAR(vs[i], va[i] + 3.0 * vc[i], 1e-12 * (std::abs(va[i]) + 3.0 * std::abs(vc[i])));
      EXPECT_NEAR(ws[i], wa[i] + 3.0 * wc[i], 1e-12 * (std::abs(wa[i]) + 3.0 * std::abs(wc[i])));
    }
  }
}

TEST(BilinearCommutator, RequiresBilinearSpec) {
  const GridFunction f = GridFunction::constant(Cube::interval(0.0, 1.0), 8, 1.0);
  EXPECT_THROW(bilinear_commutator_apply(linear_task(identity_b(kBig, 64), hilbert()), f, f, {{4.0, 0.0}}),
               DomainError);
  CommutatorTask t{identity_b(kBig, 64), BilinearFractionalSpec::make(1, 1.0)};
  EXPECT_THROW(commutator_apply(t, f, {{4.0, 0.0}}), DomainError);
}
