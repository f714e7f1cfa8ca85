#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmhd/kernel.hpp"
#include "gmhd/spectral.hpp"

using namespace gmhd;

namespace {

double max_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::fabs(a.values()[i] - b.values()[i]));
  return m;
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.coeffs().size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
  return m;
}

// Random trigonometric polynomial with modes |k_i| <= kmax, optionally mean-zero.
RealField random_trig(const GridPtr& g, std::mt19937_64& rng, int kmax, bool mean_zero) {
  std::normal_distribution<double> nd;
  RealField f(g);
  for (int a = -kmax; a <= kmax; ++a) {
    for (int b = 0; b <= kmax; ++b) {
      if (b == 0 && a <= 0) continue;
      const double c = nd(rng) / (1.0 + a * a + b * b), s = nd(rng) / (1.0 + a * a + b * b);
      const RealField m = RealField::sample(g, [&](double x1, double x2) {
        return c * std::cos(a * x1 + b * x2) + s * std::sin(a * x1 + b * x2);
      });
      for (std::size_t i = 0; i < f.values().size(); ++i) f.values()[i] += m.values()[i];
    }
  }
  if (!mean_zero) {
    for (double& v : f.values()) v += 0.3;
  }
  return f;
}

}  // namespace

TEST(Grid, Layout) {
  const auto g = make_grid(16);
  EXPECT_EQ(g->real_size(), 256u);
  EXPECT_EQ(g->half(), 9);
  EXPECT_EQ(g->k2(15), -1);
  EXPECT_EQ(g->k2(7), 7);
  EXPECT_EQ(g->k2(8), -8);
  EXPECT_TRUE(g->nyquist(8, 0));
  EXPECT_TRUE(g->nyquist(0, 8));
  // two-thirds mask: |k| <= n/3
  EXPECT_TRUE(g->retained(5, 5));
  EXPECT_FALSE(g->retained(0, 6));
  EXPECT_TRUE(g->retained(11, 0));   // k2 = -5
  EXPECT_FALSE(g->retained(10, 0));  // k2 = -6
}

TEST(Grid, RejectsOddOrTinyN) {
  for (int n : {3, 7, 2, 0}) {
    try {
      SpectralGrid g(n);
      FAIL() << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), errc::rejected_odd_n);
    }
  }
}

TEST(Grid, DistinctKappas) {
  const auto k = make_grid(8)->distinct_kappas();
  ASSERT_GE(k.size(), 3u);
  EXPECT_EQ(k[0], 0.0);
  EXPECT_EQ(k[1], 1.0);
  EXPECT_DOUBLE_EQ(k[2], std::sqrt(2.0));
  for (std::size_t i = 1; i < k.size(); ++i) EXPECT_LT(k[i - 1], k[i]);
}

TEST(Transform, RoundTripAndParseval) {
  std::mt19937_64 rng(7);
  for (int n : {16, 64, 128}) {
    const auto g = make_grid(n);
    const RealField f = random_trig(g, rng, n / 4, false);
    const SpectralField s = forward(f);
    const RealField back = inverse(s);
    EXPECT_LT(max_diff(back, f), 1e-12 * sup_norm(f)) << n;
    const double real_l2 = inner(f, f);
    EXPECT_NEAR(l2_norm_sq(s) / real_l2, 1.0, 1e-10) << n;
  }
}

TEST(Transform, SingleModeNormalization) {
  const auto g = make_grid(16);
  const auto s = forward(RealField::sample(g, [](double x1, double x2) { return std::cos(3 * x1 - 2 * x2); }));
  // cos(3x1 - 2x2) = (e^{i(3,-2).x} + c.c.)/2; stored at col 3, k2 = -2.
  EXPECT_NEAR(std::abs(s(14, 3) - Complex(0.5, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(max_abs_coeff(s), 0.5, 1e-15);
}

TEST(Operators, DerivativeLaplacianGradient) {
  const auto g = make_grid(32);
  const auto s = forward(RealField::sample(g, [](double x1, double x2) { return std::sin(x1) * std::cos(2 * x2); }));
  const auto d1 = inverse(derivative(s, 1));
  const auto d2 = inverse(derivative(s, 2));
  EXPECT_LT(max_diff(d1, RealField::sample(g, [](double x1, double x2) { return std::cos(x1) * std::cos(2 * x2); })),
            1e-13);
  EXPECT_LT(
      max_diff(d2, RealField::sample(g, [](double x1, double x2) { return -2 * std::sin(x1) * std::sin(2 * x2); })),
      1e-13);
  const auto lap = inverse(laplacian(forward(RealField::sample(g, [](double x1, double) { return std::sin(x1); }))));
  EXPECT_LT(max_diff(lap, RealField::sample(g, [](double x1, double) { return -std::sin(x1); })), 1e-13);
  const auto grad = gradient(s);
  EXPECT_EQ(max_diff(grad.x1, derivative(s, 1)), 0.0);
  EXPECT_EQ(max_diff(grad.x2, derivative(s, 2)), 0.0);
}

TEST(Operators, NyquistIsZeroedByDerivatives) {
  const auto g = make_grid(8);
  const auto s = forward(RealField::sample(g, [](double x1, double) { return std::cos(4 * x1); }));
  EXPECT_GT(std::abs(s(0, 4)), 0.9);
  EXPECT_EQ(max_abs_coeff(derivative(s, 1)), 0.0);
  EXPECT_EQ(max_abs_coeff(laplacian(s)), 0.0);
}

TEST(Curl, Examples) {
  const auto g = make_grid(32);
  const SpectralVector v{SpectralField(g),
                         forward(RealField::sample(g, [](double x1, double) { return -std::cos(x1); }))};
  const auto w = inverse(curl_2d(v));
  EXPECT_LT(max_diff(w, RealField::sample(g, [](double x1, double) { return std::sin(x1); })), 1e-14);
  const SpectralVector zero{SpectralField(g), SpectralField(g)};
  EXPECT_EQ(max_abs_coeff(curl_2d(zero)), 0.0);
}

TEST(BiotSavart, SingleMode) {
  const auto g = make_grid(32);
  const auto u = inverse(biot_savart(forward(RealField::sample(g, [](double x1, double) { return std::sin(x1); }))));
  EXPECT_LT(sup_norm(u.x1), 1e-15);
  EXPECT_LT(max_diff(u.x2, RealField::sample(g, [](double x1, double) { return -std::cos(x1); })), 1e-14);
}

TEST(BiotSavart, TwoModes) {
  // u = (-sin x2, -cos x1): curl u = d1 u2 - d2 u1 = sin x1 + cos x2.
  const auto g = make_grid(32);
  const auto w = forward(RealField::sample(g, [](double x1, double x2) { return std::sin(x1) + std::cos(x2); }));
  const auto uh = biot_savart(w);
  const auto u = inverse(uh);
  EXPECT_LT(max_diff(u.x1, RealField::sample(g, [](double, double x2) { return -std::sin(x2); })), 1e-14);
  EXPECT_LT(max_diff(u.x2, RealField::sample(g, [](double x1, double) { return -std::cos(x1); })), 1e-14);
  EXPECT_LT(max_diff(curl_2d(uh), w), 1e-12);
}

TEST(BiotSavart, ZeroAndNonZeroMean) {
  const auto g = make_grid(16);
  const auto u = biot_savart(SpectralField(g));
  EXPECT_EQ(max_abs_coeff(u.x1), 0.0);
  EXPECT_EQ(max_abs_coeff(u.x2), 0.0);
  try {
    biot_savart(forward(RealField::sample(g, [](double x1, double) { return 1.0 + std::sin(x1); })));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::non_zero_mean);
  }
}

TEST(BiotSavart, RandomIdentities) {
  std::mt19937_64 rng(11);
  const auto g = make_grid(64);
  for (int trial = 0; trial < 10; ++trial) {
    const auto w = forward(random_trig(g, rng, 20, true));
    const auto u = biot_savart(w);
    EXPECT_LT(max_abs_coeff(divergence(u)), 1e-12);
    EXPECT_LT(max_diff(curl_2d(u), w), 1e-12 * std::max(1.0, max_abs_coeff(w)));
    // round trip through a solenoidal field
    EXPECT_LT(max_diff(curl_2d(biot_savart(curl_2d(u))), curl_2d(u)), 1e-12);
  }
}

TEST(Dealias, MaskAndEnergy) {
  std::mt19937_64 rng(3);
  const auto g = make_grid(32);
  const auto band = forward(random_trig(g, rng, 10, true));  // 10 <= 32/3
  EXPECT_LT(max_diff(dealias(band), band), 1e-15);  // only transform round-off outside the band
  const auto full = forward(random_trig(g, rng, 15, true));
  const auto d = dealias(full);
  EXPECT_LT(l2_norm_sq(d), l2_norm_sq(full));
  for (int row = 0; row < g->n(); ++row) {
    for (int col = 0; col < g->half(); ++col) {
      if (!g->retained(row, col)) {
        EXPECT_EQ(std::abs(d(row, col)), 0.0);
      }
    }
  }
}

TEST(Dealias, ProductToSum) {
  const auto g = make_grid(16);
  const auto s = forward(RealField::sample(g, [](double x1, double) { return std::sin(x1); }));
  const auto p = inverse(pointwise_product(s, s));
  EXPECT_LT(max_diff(p, RealField::sample(g, [](double x1, double) { return 0.5 - 0.5 * std::cos(2 * x1); })),
            1e-14);
}

TEST(Symbol, ApplyToConstantAndScaling) {
  const auto g = make_grid(16);
  const auto sym = grid_symbol(KernelProfile::power_law(0.5), *g);
  const auto c = forward(RealField::sample(g, [](double, double) { return 2.5; }));
  EXPECT_EQ(max_abs_coeff(apply_symbol(c, sym)), 0.0);

  const auto s = forward(RealField::sample(g, [](double x1, double) { return std::sin(2 * x1); }));
  const double s1 = sym.at(1.0);
  const auto out = inverse(apply_symbol(s, sym));
  EXPECT_NEAR(sym.at(2.0) / s1, 2.0, 1e-9);
  EXPECT_LT(max_diff(out, RealField::sample(g, [&](double x1, double) { return 2 * s1 * std::sin(2 * x1); })),
            1e-8 * s1);
}

TEST(Symbol, GridMismatch) {
  const auto g = make_grid(16);
  DissipationSymbol sym = zero_symbol(*make_grid(8));
  try {
    apply_symbol(SpectralField(g), sym);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::symbol_grid_mismatch);
  }
}

TEST(Symbol, NearLocalLimitIsLaplacianShaped) {
  // alpha = 1 itself diverges; alpha -> 1 approaches a multiple of -laplacian.
  const auto g = make_grid(128);
  DissipationSymbol sym;
  sym.profile_id = "near-local";
  sym.kappas = g->distinct_kappas();
  for (double k : sym.kappas) sym.sigmas.push_back(k == 0.0 ? 0.0 : closed_form_fractional_symbol(0.9999, k));
  const auto mult = mode_multiplier(*g, sym);
  const double c = sym.at(1.0);
  double worst = 0.0;
  for (int row = 0; row < g->n(); ++row) {
    for (int col = 0; col < g->half(); ++col) {
      const auto ksq = g->ksq(row, col);
      if (ksq == 0 || !g->retained(row, col)) continue;
      worst = std::max(worst, std::fabs(mult[g->index(row, col)] / (c * ksq) - 1.0));
    }
  }
  EXPECT_LT(worst, 1e-3);
  EXPECT_THROW(compute_symbol(KernelProfile::power_law(1.0), {1.0}), Error);
}

TEST(Norms, LpAndSup) {
  const auto g = make_grid(64);
  const auto f = RealField::sample(g, [](double x1, double) { return std::sin(x1); });
  const double pi = std::numbers::pi;
  EXPECT_NEAR(lp_norm(f, 2.0), std::sqrt(2 * pi * pi), 1e-12);
  // int sin^4 = 3/8 * 4 pi^2
  EXPECT_NEAR(std::pow(lp_norm(f, 4.0), 4), 1.5 * pi * pi, 1e-11);
  EXPECT_NEAR(sup_norm(f), 1.0, 1e-12);
  const auto m = magnitude({f, f});
  EXPECT_NEAR(sup_norm(m), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(weighted_norm_sq(forward(f), [](int, int) { return 2.0; }), 2 * l2_norm_sq(forward(f)), 1e-12);
}
