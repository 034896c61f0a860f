#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pinstat/infer.hpp"
#include "electrode_phases.hpp"

using namespace pinstat;
using pinstat::testdata::kO1;
using pinstat::testdata::kP3;

constexpr double kPi = std::numbers::pi;

namespace {

CircularSummary summary_with(std::size_t n, double r_bar) {
  CircularSummary s;
  s.n = n;
  s.R_bar = s.C_bar = r_bar;
  s.csm = r_bar * r_bar;
  s.direction_defined = r_bar > 0;
  return s;
}

}  // namespace

TEST(RayleighTest, CriticalValuesAtTwelve) {
  const auto s = summary_with(12, 0.5);
  const auto chi2 = rayleigh_test(s, 0.05, RayleighFlavor::chi2);
  EXPECT_NEAR(chi2.critical_value, std::log(20.0) / 12, 1e-15);
  EXPECT_NEAR(chi2.critical_value, 0.2496, 5e-5);
  EXPECT_NEAR(chi2.critical_value, 0.25, 5e-3);
  EXPECT_NEAR(rayleigh_test(s, 0.05, RayleighFlavor::stephens_exact_table).critical_value, 0.244, 5e-4);
  EXPECT_NEAR(rayleigh_test(s, 0.05, RayleighFlavor::normal).critical_value, 0.247, 5e-4);
}

TEST(RayleighTest, RejectionRule) {
  EXPECT_TRUE(rayleigh_test(summary_with(12, 0.6), 0.05, RayleighFlavor::chi2).reject);
  EXPECT_FALSE(rayleigh_test(summary_with(12, 0.4), 0.05, RayleighFlavor::chi2).reject);
  const auto t = rayleigh_test(summary_with(12, 0.4), 0.05, RayleighFlavor::chi2);
  EXPECT_NEAR(*t.p_value, std::exp(-12 * 0.16), 1e-15);
  EXPECT_EQ(t.method, TestMethod::rayleigh_chi2);
}

TEST(RayleighTest, Errors) {
  EXPECT_THROW(rayleigh_test(summary_with(13, 0.5), 0.05, RayleighFlavor::stephens_exact_table), UnsupportedError);
  EXPECT_THROW(rayleigh_test(summary_with(12, 0.5), 0.01, RayleighFlavor::stephens_exact_table), UnsupportedError);
  EXPECT_THROW(rayleigh_test(summary_with(12, 0.5), 1.5, RayleighFlavor::chi2), DomainError);
  EXPECT_THROW(rayleigh_test(summary_with(1, 0.5), 0.05, RayleighFlavor::chi2), DomainError);
}

TEST(RayleighTest, Chi2AndNormalAgreeForLargeN) {
  int agree = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    const auto s = circ_summary(pin_sample(150, {0.0, 0.0}, 5000 + r));
    agree += rayleigh_test(s, 0.05, RayleighFlavor::chi2).reject == rayleigh_test(s, 0.05, RayleighFlavor::normal).reject;
  }
  EXPECT_GE(agree, 0.99 * reps);
}

TEST(LrtUniformity, UniformGridGivesZero) {
  std::vector<double> grid;
  for (int i = 0; i < 10; ++i) grid.push_back(2 * kPi * i / 10);
  const auto t = lrt_uniformity(AngleSample(grid));
  EXPECT_NEAR(t.statistic, 0.0, 1e-12);
  EXPECT_FALSE(t.reject);
  EXPECT_TRUE(t.approximate);
  EXPECT_EQ(t.df1, 2);
}

TEST(LrtUniformity, SimpleMatchesCompositeAtMle) {
  const AngleSample s(kP3);
  const auto fit = pin_mle(s, MleMode::joint);
  EXPECT_NEAR(lrt_uniformity_simple(s, fit.mu_hat, fit.gamma_hat).statistic, lrt_uniformity(s).statistic, 1e-12);
}

TEST(LrtUniformity, PowerAtGammaTwoPointFive) {
  int rejections = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) rejections += lrt_uniformity(pin_sample(50, {1.0, 2.5}, 8000 + r)).reject;
  EXPECT_GE(rejections, 0.99 * reps);
}

TEST(TwoSampleLrt, IdenticalSamplesGiveZero) {
  const AngleSample s(kP3);
  EXPECT_NEAR(two_sample_lrt(s, s).statistic, 0.0, 1e-8);
  EXPECT_NEAR(two_sample_lrt(s, s, 0.05, TwoSampleNull::common_gamma).statistic, 0.0, 1e-8);
}

TEST(TwoSampleLrt, Electrodes) {
  const auto t = two_sample_lrt(AngleSample(kO1), AngleSample(kP3));
  EXPECT_NEAR(t.statistic, 43.7, 1.0);
  EXPECT_EQ(t.df1, 2);
  EXPECT_TRUE(t.reject);
  const auto g = two_sample_lrt(AngleSample(kO1), AngleSample(kP3), 0.05, TwoSampleNull::common_gamma);
  EXPECT_EQ(g.df1, 1);
  EXPECT_LE(g.statistic, t.statistic);
}

TEST(TwoSampleLrt, SizeCalibration) {
  int rejections = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(31, r);
    const auto a = pin_sample(50, {0.5, 1.0}, rng), b = pin_sample(50, {0.5, 1.0}, rng);
    rejections += two_sample_lrt(a, b).reject;
  }
  EXPECT_NEAR(rejections / double(reps), 0.05, 0.02);
}

TEST(TwoSampleF, ElectrodeRawPhases) {
  const auto t = two_sample_F(circ_summary(AngleSample(kO1)), circ_summary(AngleSample(kP3)));
  EXPECT_GE(t.statistic, 90.0);
  EXPECT_LE(t.statistic, 140.0);
  EXPECT_TRUE(t.reject);
  EXPECT_EQ(t.df1, 11);
  EXPECT_EQ(t.df2, 11);
}

TEST(TwoSampleF, EqualAndDegenerate) {
  EXPECT_DOUBLE_EQ(two_sample_F(summary_with(12, 0.7), summary_with(12, 0.7)).statistic, 1.0);
  const auto inf = two_sample_F(summary_with(12, 1.0), summary_with(12, 0.7));
  EXPECT_TRUE(std::isinf(inf.statistic));
  EXPECT_FALSE(inf.notes.empty());
}

TEST(TwoSampleF, IncreasingInFirstRbar) {
  double prev = 0;
  for (double r1 = 0.1; r1 < 0.99; r1 += 0.05) {
    const double f = two_sample_F(summary_with(12, r1), summary_with(12, 0.5)).statistic;
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(TwoSampleF, SizeUnderVonMises) {
  int rejections = 0;
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng(41, r);
    const AngleSample a(vm_sample(12, {0.0, 5.0}, rng)), b(vm_sample(12, {0.0, 5.0}, rng));
    rejections += two_sample_F(circ_summary(a), circ_summary(b)).reject;
  }
  EXPECT_NEAR(rejections / double(reps), 0.05, 0.02);
}

TEST(FQuantile, InvertsSurvival) {
  for (double p : {0.01, 0.05, 0.5}) EXPECT_NEAR(f_sf(11, 11, f_quantile_upper(11, 11, p)), p, 1e-12);
}

TEST(KappaCi, OrderingAndErrors) {
  const auto ci = kappa_ci(10.0, 12);
  EXPECT_GT(ci.lower, 0.0);
  EXPECT_LE(ci.lower, ci.upper);
  EXPECT_EQ(ci.target, IntervalTarget::kappa);
  EXPECT_DOUBLE_EQ(ci.level, 0.95);
  EXPECT_THROW(kappa_ci(12.0, 12), DomainError);
  EXPECT_THROW(kappa_ci(-1.0, 12), DomainError);
  EXPECT_TRUE(kappa_ci(3.0, 12).warnings.size() == 1);
  EXPECT_TRUE(kappa_ci(11.0, 12).warnings.empty());
}

TEST(KappaCi, FormulaAtEqualRatios) {
  // a = b collapses both endpoints to the same value
  const double a = 0.1;
  EXPECT_DOUBLE_EQ(detail::kappa_from_ratio(a), (1 + std::sqrt(1 + 3 * a)) / (4 * a));
}

TEST(KappaCi, WidthShrinksWithN) {
  double prev = INFINITY;
  for (int n : {12, 50, 200}) {
    const auto s = circ_summary(AngleSample(vm_sample(n, {0.0, 4.0}, 13)));
    const auto ci = kappa_ci(n * s.R_bar, n);
    EXPECT_LT(ci.upper - ci.lower, prev) << n;
    prev = ci.upper - ci.lower;
  }
}

TEST(GammaCi, DivideByFourAndExact) {
  ConfidenceInterval k{8.0, 12.0, 0.95, IntervalTarget::kappa, {}};
  const auto g = gamma_ci(k);
  EXPECT_DOUBLE_EQ(g.lower, 2.0);
  EXPECT_DOUBLE_EQ(g.upper, 3.0);
  EXPECT_EQ(g.target, IntervalTarget::gamma);
  const auto e = gamma_ci(k, GammaIntervalMode::exact);
  EXPECT_NEAR(approx1_kappa(e.lower), 8.0, 1e-7);
  EXPECT_NEAR(approx1_kappa(e.upper), 12.0, 1e-7);
  EXPECT_NEAR(e.lower / 2.0, 1.0, 0.02);
  EXPECT_NEAR(e.upper / 3.0, 1.0, 0.02);
  EXPECT_THROW(gamma_ci(g), DomainError);
  EXPECT_THROW(csm_ci(k), DomainError);
}

TEST(CsmCi, ElectrodeO1) {
  const auto ci = sample_csm_ci(circ_summary(AngleSample(kO1)));
  EXPECT_NEAR(ci.lower, 0.9810, 0.002);
  EXPECT_NEAR(ci.upper, 0.9967, 0.002);
  EXPECT_EQ(ci.target, IntervalTarget::csm);
}

// Published interval for P3; the large-kappa construction lands at (0.093, 0.608).
TEST(CsmCi, ElectrodeP3) {
  const auto ci = sample_csm_ci(circ_summary(AngleSample(kP3)));
  EXPECT_NEAR(ci.lower, 0.0507, 0.01);
  EXPECT_NEAR(ci.upper, 0.7652, 0.01);
  EXPECT_FALSE(ci.warnings.empty());
}

TEST(CsmCi, CoverageAtGammaTwoPointFive) {
  int covered = 0;
  const int reps = 2000, n = 50;
  const double gamma = 2.5;
  for (int r = 0; r < reps; ++r) {
    const auto s = circ_summary(pin_sample(n, {0.0, gamma}, 20000 + r));
    const auto g = gamma_ci(kappa_ci(n * s.R_bar, n), GammaIntervalMode::exact);
    covered += g.lower <= gamma && gamma <= g.upper;
  }
  EXPECT_NEAR(covered / double(reps), 0.95, 0.02);
}

TEST(TestMethod, Names) {
  EXPECT_STREQ(to_string(TestMethod::two_sample_f), "two_sample_f");
  EXPECT_STREQ(to_string(IntervalTarget::csm), "csm");
}
