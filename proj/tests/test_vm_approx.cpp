#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

#include "pinstat/von_mises.hpp"

using namespace pinstat;

constexpr double kPi = std::numbers::pi;

struct KappaRow {
  double gamma, kappa1, kappa2;
};

// von Mises concentrations matched to PIN(gamma)
constexpr KappaRow kKappaGrid[] = {{0.05, 0.5686, 0.5746},   {0.25, 1.3513, 1.4161},   {0.50, 2.0786, 2.2473},
                                 {0.75, 2.7936, 3.0642},   {1.00, 3.5628, 3.9059},   {2.00, 7.2644, 7.5655},
                                 {2.50, 9.2872, 9.5093},   {3.75, 14.3748, 14.4765}, {5.00, 19.4204, 19.4790}};

TEST(VonMisesPdf, UniformAtZeroAndModeValue) {
  EXPECT_NEAR(vm_pdf(1.0, {0.0, 0.0}), 1 / (2 * kPi), 1e-15);
  EXPECT_NEAR(vm_pdf(0.3, {0.3, 2.0}), std::exp(2.0) / (2 * kPi * boost::math::cyl_bessel_i(0, 2.0)), 1e-14);
  EXPECT_THROW(VonMisesParams(0.0, -1.0), DomainError);
}

TEST(VonMisesPdf, NormalizesAndIsSymmetric) {
  for (double k : {0.5, 2.0, 10.0, 300.0}) {
    const VonMisesParams p(0.2, k);
    EXPECT_NEAR(integrate([&](double t) { return vm_pdf(t, p); }, -kPi, kPi, {1e-13, 1e-13}).value, 1.0, 1e-10) << k;
    for (double d = 0; d < kPi; d += 0.3) EXPECT_NEAR(vm_pdf(0.2 + d, p), vm_pdf(0.2 - d, p), 1e-13 * vm_pdf(0.2, p));
  }
}

TEST(Approx1Kappa, ReferenceGrid) {
  for (const auto& r : kKappaGrid) EXPECT_NEAR(approx1_kappa(r.gamma), r.kappa1, 5e-4) << r.gamma;
  EXPECT_EQ(approx1_kappa(0.0), 0.0);
}

TEST(Approx2Kappa, ReferenceGrid) {
  for (const auto& r : kKappaGrid) EXPECT_NEAR(approx2_kappa(r.gamma), r.kappa2, 5e-4) << r.gamma;
  EXPECT_EQ(approx2_kappa(0.0), 0.0);
}

TEST(Approx1Kappa, IsInverseOfAOfRho) {
  for (double g : {0.01, 0.3, 1.0, 7.0, 30.0}) EXPECT_NEAR(mean_resultant_A(approx1_kappa(g)), pin_rho(g), 1e-12);
}

TEST(ApproxKappa, StrictlyIncreasing) {
  double p1 = -1, p2 = -1;
  for (double g = 0.001; g < 100; g *= 1.1) {
    const double k1 = approx1_kappa(g), k2 = approx2_kappa(g);
    EXPECT_GT(k1, p1);
    EXPECT_GT(k2, p2);
    p1 = k1;
    p2 = k2;
  }
}

TEST(ApproxKappa, SmallAndLargeGammaLimits) {
  const double small = 1e-4, large = 50.0;
  EXPECT_NEAR(approx1_kappa(small) / std::sqrt(2 * kPi * small), 1.0, 0.01);
  EXPECT_NEAR(approx2_kappa(small) / std::sqrt(2 * kPi * small), 1.0, 0.01);
  EXPECT_NEAR(approx1_kappa(large) / (4 * large), 1.0, 0.01);
  EXPECT_NEAR(approx2_kappa(large) / (4 * large), 1.0, 0.01);
}

TEST(ApproxKappa, GapNonNegativeWithPeakNearTwoPointFive) {
  double best = -1, at = 0;
  for (double g = 0.05; g <= 5.0 + 1e-12; g += 0.01) {
    const double d = approx2_kappa(g) - approx1_kappa(g);
    EXPECT_GE(d, 0.0) << g;
    if (d > best) best = d, at = g;
  }
  EXPECT_NEAR(best, 0.37, 0.05);
  EXPECT_NEAR(at, 2.5, 0.5);
}

TEST(KlPinVm, NonNegative) {
  for (double g : {0.25, 0.75, 2.5}) {
    EXPECT_GE(kl_pin_vm(g, approx1_kappa(g)), 0.0);
    EXPECT_GE(kl_pin_vm(g, approx2_kappa(g)), 0.0);
  }
  EXPECT_THROW(kl_pin_vm(0.0, 1.0), DomainError);
}

TEST(KlPinVm, DifferenceAtGammaPointSevenFive) {
  const double g = 0.75;
  const double kl1 = kl_pin_vm(g, approx1_kappa(g)), kl2 = kl_pin_vm(g, approx2_kappa(g));
  EXPECT_LE(kl1, kl2);
  EXPECT_NEAR(std::abs(kl1 - kl2), 0.003, 0.002);
}

TEST(KlPinVm, ApproximationsAgreeAtExtremes) {
  for (double g : {1e-3, 5.0, 10.0}) EXPECT_NEAR(kl_pin_vm(g, approx1_kappa(g)), kl_pin_vm(g, approx2_kappa(g)), 1e-3) << g;
}

TEST(KlPinVm, MatchesDirectQuadrature) {
  const double g = 1.3, k = 4.0;
  const PinParams p(0, g);
  const VonMisesParams v(0, k);
  const double direct = integrate(
      [&](double t) { return pin_pdf(t, p) * std::log(pin_pdf(t, p) / vm_pdf(t, v)); }, -kPi, kPi, {1e-13, 1e-12}).value;
  EXPECT_NEAR(kl_pin_vm(g, k), direct, 1e-9);
}

TEST(VmSample, MeanResultantMatchesA) {
  for (double k : {0.5, 2.0, 8.0}) {
    RandomStream rng(3);
    const int n = 100000;
    const auto s = vm_sample(n, {0.0, k}, rng);
    double c = 0, si = 0;
    for (double t : s) c += std::cos(t), si += std::sin(t);
    c /= n;
    si /= n;
    const double a = mean_resultant_A(k);
    // var(cos) = (1 + A2)/2 - A^2 with A2 = I2/I0 = 1 - 2A/k
    const double var = (2.0 - 2.0 * a / k) / 2.0 - a * a;
    EXPECT_NEAR(c, a, 4 * std::sqrt(var / n)) << k;
    EXPECT_NEAR(si, 0.0, 4 * std::sqrt((1 - (1 - 2 * a / k)) / 2.0 / n)) << k;
  }
}
