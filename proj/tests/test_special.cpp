#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

#include "pinstat/special.hpp"

using namespace pinstat;

namespace bm = boost::math;

TEST(NormalPdfCdf, ValuesAtZero) {
  const auto v = normal_pdf_cdf(0.0);
  EXPECT_NEAR(v.pdf, 0.3989422804014327, 1e-15);
  EXPECT_DOUBLE_EQ(v.cdf, 0.5);
}

TEST(NormalPdfCdf, ReflectionIdentity) {
  for (double x : {0.1, 0.5, 1.0, 1.96, 3.0, 7.5}) EXPECT_NEAR(normal_cdf(x) + normal_cdf(-x), 1.0, 1e-15) << x;
}

TEST(NormalPdfCdf, KnownQuantile) {
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-14);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
}

TEST(NormalPdfCdf, NonFiniteIsDomainError) {
  EXPECT_THROW(normal_pdf_cdf(std::nan("")), DomainError);
  EXPECT_THROW(normal_pdf_cdf(INFINITY), DomainError);
}

TEST(NormalPdfCdf, CdfMonotone) {
  double prev = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.01) {
    const double c = normal_cdf(x);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(LogPhiPlusXPhi, MatchesDirectFormAndTail) {
  for (double x : {-4.9, -2.0, 0.0, 1.0, 5.0}) {
    EXPECT_NEAR(log_phi_plus_x_Phi(x), std::log(normal_pdf(x) + x * normal_cdf(x)), 1e-12) << x;
  }
  // continuity across the switch to the continued fraction
  EXPECT_NEAR(log_phi_plus_x_Phi(-5.0 - 1e-9), log_phi_plus_x_Phi(-5.0 + 1e-9), 1e-7);
  // far tail: phi(x) + x Phi(x) ~ phi(x) / x^2
  const double x = -30.0;
  EXPECT_NEAR(log_phi_plus_x_Phi(x), -0.5 * x * x - 0.5 * std::log(2 * std::numbers::pi) - 2 * std::log(30.0), 5e-3);
}

TEST(BesselI, AtZero) {
  EXPECT_EQ(bessel_i(0, 0), 1.0);
  EXPECT_EQ(bessel_i(1, 0), 0.0);
  EXPECT_EQ(bessel_i(2.5, 0), 0.0);
}

TEST(BesselI, OrderOneAtTwo) { EXPECT_NEAR(bessel_i(1, 2.0), 1.590636854637329, 1e-14); }

TEST(BesselI, HalfOrdersAreHyperbolic) {
  for (double z = 0.05; z <= 30.0; z += 0.37) {
    const double f = std::sqrt(std::numbers::pi * z / 2.0);
    EXPECT_NEAR(bessel_i(0.5, z) * f / std::sinh(z), 1.0, 1e-10) << z;
    EXPECT_NEAR(bessel_i(-0.5, z) * f / std::cosh(z), 1.0, 1e-10) << z;
  }
}

TEST(BesselI, MatchesBoostAcrossRegimes) {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 3.5, 7.0}) {
    for (double z : {1e-3, 0.1, 0.64, 1.0, 5.0, 12.0, 29.9, 30.1, 41.24, 80.0, 300.0, 700.0}) {
      const double ref = bm::cyl_bessel_i(nu, z) * std::exp(-z);
      EXPECT_NEAR(bessel_i(nu, z, true) / ref, 1.0, 1e-12) << "nu=" << nu << " z=" << z;
    }
  }
}

TEST(BesselI, ScaledTimesExpEqualsUnscaled) {
  for (double nu : {0.0, 1.0, 2.5})
    for (double z : {0.5, 10.0, 35.0, 200.0})
      EXPECT_NEAR(bessel_i(nu, z, true) * std::exp(z) / bessel_i(nu, z, false), 1.0, 1e-12);
}

TEST(BesselI, LargeArgumentScaledStaysFinite) {
  EXPECT_TRUE(std::isfinite(bessel_i0e(1e6)));
  EXPECT_NEAR(bessel_i0e(1e6) * std::sqrt(2 * std::numbers::pi * 1e6), 1.0, 1e-6);
  // Hankel series 1 + 1/(8x) + 9/(2 (8x)^2) + ...
  const double x = 1000.0;
  EXPECT_NEAR(log_bessel_i0(x), x - 0.5 * std::log(2 * std::numbers::pi * x) + std::log1p(1 / (8 * x) + 9 / (128 * x * x)), 1e-9);
}

TEST(BesselI, DomainErrors) {
  EXPECT_THROW(bessel_i(0, -1.0), DomainError);
  EXPECT_THROW(bessel_i(-1.0, 1.0), DomainError);
  EXPECT_THROW(bessel_i(-0.3, 1.0), DomainError);
}

TEST(BesselJ, KnownValues) {
  EXPECT_EQ(bessel_j0(0.0), 1.0);
  EXPECT_NEAR(bessel_j0(5.0), -0.1775967713143383, 1e-15);
  EXPECT_NEAR(bessel_j0(2.404825557695773), 0.0, 1e-15);
  EXPECT_THROW(bessel_j0(-1.0), DomainError);
}

TEST(BesselJ, MatchesBoostAndIsBounded) {
  for (double z = 0.0; z < 200.0; z += 0.173) {
    const double j0 = bessel_j0(z), j1 = bessel_j1(z);
    EXPECT_NEAR(j0, bm::cyl_bessel_j(0, z), 2e-15) << z;
    EXPECT_NEAR(j1, bm::cyl_bessel_j(1, z), 2e-15) << z;
    EXPECT_LE(std::abs(j0), 1.0);
  }
}

TEST(BesselJ, ZerosMatchBoost) {
  for (int s = 1; s <= 200; ++s) EXPECT_NEAR(bessel_j0_zero(s), bm::cyl_bessel_j_zero(0.0, s), 1e-12 * s) << s;
}

TEST(MeanResultantA, Values) {
  EXPECT_EQ(mean_resultant_A(0.0), 0.0);
  EXPECT_NEAR(mean_resultant_A(2.0), 0.698, 5e-4);
  EXPECT_NEAR(mean_resultant_A(2.7), 0.785, 5e-4);
}

TEST(MeanResultantA, StrictlyIncreasingBelowOne) {
  double prev = -1.0;
  for (double k = 0.0; k <= 500.0; k += 0.25) {
    const double a = mean_resultant_A(k);
    EXPECT_GT(a, prev);
    EXPECT_LT(a, 1.0);
    prev = a;
  }
}

TEST(InvA, Values) {
  EXPECT_EQ(inv_A(0.0), 0.0);
  EXPECT_NEAR(inv_A(0.698), 2.0, 5e-3);
  for (double r : {0.1, 0.5, 0.9}) EXPECT_LT(std::abs(mean_resultant_A(inv_A(r)) - r), 1e-10);
  EXPECT_THROW(inv_A(1.0), DomainError);
  EXPECT_THROW(inv_A(-0.1), DomainError);
}

TEST(InvA, RoundTripOnKappaGrid) {
  for (double k = 0.0; k <= 50.0; k += 0.05) EXPECT_NEAR(inv_A(mean_resultant_A(k)), k, 1e-10 * std::max(1.0, k * k)) << k;
}

TEST(Chi2Quantile, Examples) {
  EXPECT_DOUBLE_EQ(chi2_quantile(2, 0.05), -2.0 * std::log(0.05));
  EXPECT_NEAR(chi2_quantile(2, 0.05), 5.9915, 5e-5);
  EXPECT_NEAR(chi2_quantile(11, 0.025), 21.920, 5e-4);
  EXPECT_NEAR(chi2_quantile(11, 0.975), 3.816, 5e-4);
  EXPECT_THROW(chi2_quantile(3, 0.0), DomainError);
  EXPECT_THROW(chi2_quantile(3, 1.0), DomainError);
  EXPECT_THROW(chi2_quantile(0, 0.5), DomainError);
}

TEST(Chi2Quantile, MatchesBoostAndRoundTrips) {
  for (int df : {1, 2, 3, 5, 11, 30, 100, 300}) {
    const bm::chi_squared dist(df);
    double prev = 0.0;
    for (double p : {0.001, 0.025, 0.05, 0.3, 0.5, 0.7, 0.95, 0.975, 0.999}) {
      const double lo = chi2_quantile(df, p, Tail::lower);
      EXPECT_NEAR(lo, bm::quantile(dist, p), 1e-9 * std::max(1.0, lo)) << df << " " << p;
      EXPECT_NEAR(chi2_cdf(df, lo), p, 1e-8);
      const double up = chi2_quantile(df, p, Tail::upper);
      EXPECT_NEAR(chi2_sf(df, up), p, 1e-8);
      EXPECT_GT(lo, prev);
      prev = lo;
    }
  }
}

TEST(IncompleteBeta, MatchesBoost) {
  for (double a : {0.5, 1.0, 5.5, 20.0})
    for (double b : {0.5, 2.0, 5.5, 30.0})
      for (double x : {0.01, 0.2, 0.5, 0.9, 0.999}) EXPECT_NEAR(beta_inc(a, b, x), bm::ibeta(a, b, x), 1e-12);
  for (double x : {0.1, 1.0, 3.0, 129.65}) EXPECT_NEAR(f_sf(11, 11, x), bm::cdf(bm::complement(bm::fisher_f(11, 11), x)), 1e-13);
}

TEST(QuadratureSpec, Validation) {
  EXPECT_THROW((QuadratureSpec{0.0, 1e-10, 10}.validate()), DomainError);
  EXPECT_THROW((QuadratureSpec{1e-10, -1.0, 10}.validate()), DomainError);
  EXPECT_THROW((QuadratureSpec{1e-10, 1e-10, 0}.validate()), DomainError);
  EXPECT_NO_THROW((QuadratureSpec{}.validate()));
}

TEST(Integrate, ConstantDensity) {
  const auto r = integrate([](double) { return 0.5 / std::numbers::pi; }, 0.0, 2.0 * std::numbers::pi);
  EXPECT_NEAR(r.value, 1.0, 1e-14);
}

TEST(Integrate, SmoothAndSemiInfinite) {
  EXPECT_NEAR(integrate([](double x) { return std::exp(-x * x); }, 0.0, INFINITY).value, 0.5 * std::sqrt(std::numbers::pi), 1e-10);
  EXPECT_NEAR(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(integrate([](double x) { return std::sin(x); }, std::numbers::pi, 0.0).value, -2.0, 1e-12);
}

TEST(Integrate, NonConvergenceThrowsWithEstimate) {
  QuadratureSpec spec{1e-14, 1e-14, 3};
  try {
    integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, spec);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.error_bound(), 0.0);
    EXPECT_GT(e.estimate(), 1.0);
  }
}

TEST(WynnEpsilon, AcceleratesAlternatingSeries) {
  // partial sums of log 2 = 1 - 1/2 + 1/3 - ...
  std::vector<double> s;
  double sum = 0.0;
  for (int k = 1; k <= 15; ++k) {
    sum += (k % 2 ? 1.0 : -1.0) / k;
    s.push_back(sum);
  }
  EXPECT_GT(std::abs(sum - std::log(2.0)), 1e-2);
  EXPECT_NEAR(detail::wynn_epsilon(s), std::log(2.0), 1e-10);
}

TEST(IntegrateOscillatory, ProductOfTwoJ0MatchesClosedForm) {
  // int_0^inf u J0(u)^2 J0(R u) du = 2 / (pi R sqrt(4 - R^2)) at R = 1
  auto f = [](double u) {
    const double j = bessel_j0(u);
    return u * j * j * bessel_j0(u);
  };
  const auto r = integrate_oscillatory(f, 0.0, [](int k) { return bessel_j0_zero(k); }, {1e-12, 1e-10, 4000});
  EXPECT_NEAR(r.value, 2.0 / (std::numbers::pi * std::sqrt(3.0)), 1e-8);
}

TEST(IntegrateOscillatory, ConditionallyConvergentSine) {
  // int_0^inf sin(u) / u du = pi / 2
  auto f = [](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; };
  const auto r = integrate_oscillatory(f, 0.0, [](int k) { return k * std::numbers::pi; }, {1e-12, 1e-12, 2000});
  EXPECT_NEAR(r.value, 0.5 * std::numbers::pi, 1e-10);
}
