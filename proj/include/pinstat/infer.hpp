#pragma once

// Tests of uniformity and of equal concentration, and confidence intervals
// for kappa, gamma and the CSM.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pinstat/error.hpp"
#include "pinstat/estimate.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/special.hpp"

namespace pinstat {

enum class TestMethod { rayleigh_chi2, rayleigh_normal, rayleigh_stephens, lrt_uniformity, two_sample_lrt, two_sample_f };

inline const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::rayleigh_chi2: return "rayleigh_chi2";
    case TestMethod::rayleigh_normal: return "rayleigh_normal";
    case TestMethod::rayleigh_stephens: return "rayleigh_stephens";
    case TestMethod::lrt_uniformity: return "lrt_uniformity";
    case TestMethod::two_sample_lrt: return "two_sample_lrt";
    case TestMethod::two_sample_f: return "two_sample_f";
  }
  return "?";
}

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  std::optional<double> p_value;
  double alpha = 0.05;
  bool reject = false;
  TestMethod method = TestMethod::rayleigh_chi2;
  double df1 = 0.0;  // reference degrees of freedom where applicable
  double df2 = 0.0;
  bool approximate = false;
  std::vector<std::string> notes;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Rayleigh test, statistic Rbar^2
// ---------------------------------------------------------------------------

enum class RayleighFlavor { chi2, normal, stephens_exact_table };

/// Exact 5% points of Rbar under uniformity shipped with the library.
struct StephensEntry {
  int n;
  double alpha;
  double r_bar;
};
inline constexpr StephensEntry kStephensTable[] = {{12, 0.05, 0.494}};

/// chi2:    reject iff Rbar^2 >= ln(1/alpha)/n, p = exp(-n Rbar^2)
/// normal:  reject iff n Rbar^2 - 1 >= z_{1-alpha/2}, p = 2 (1 - Phi(n Rbar^2 - 1))
/// stephens_exact_table: reject iff Rbar >= tabulated exact point
inline TestResult rayleigh_test(const CircularSummary& summary, double alpha, RayleighFlavor flavor) {
  check_alpha(alpha);
  if (summary.n < 2) throw DomainError("rayleigh_test: n must be >= 2");
  const double n = static_cast<double>(summary.n);
  TestResult t;
  t.statistic = summary.csm;
  t.alpha = alpha;
  switch (flavor) {
    case RayleighFlavor::chi2:
      t.method = TestMethod::rayleigh_chi2;
      t.critical_value = std::log(1.0 / alpha) / n;
      t.p_value = std::exp(-n * summary.csm);
      t.df1 = 2;
      t.approximate = true;
      break;
    case RayleighFlavor::normal: {
      t.method = TestMethod::rayleigh_normal;
      const double z = normal_quantile(1.0 - 0.5 * alpha);
      t.critical_value = (1.0 + z) / n;
      t.p_value = std::min(1.0, 2.0 * normal_cdf(-(n * summary.csm - 1.0)));
      t.approximate = true;
      break;
    }
    case RayleighFlavor::stephens_exact_table: {
      t.method = TestMethod::rayleigh_stephens;
      const auto* hit = std::find_if(std::begin(kStephensTable), std::end(kStephensTable), [&](const StephensEntry& e) {
        return e.n == static_cast<int>(summary.n) && std::abs(e.alpha - alpha) < 1e-12;
      });
      if (hit == std::end(kStephensTable))
        throw UnsupportedError("rayleigh_test: no exact critical value shipped for n = " + std::to_string(summary.n) +
                               ", alpha = " + std::to_string(alpha) + " (available: n = 12, alpha = 0.05)");
      t.critical_value = hit->r_bar * hit->r_bar;
      break;
    }
  }
  t.reject = t.statistic >= t.critical_value;
  return t;
}

// ---------------------------------------------------------------------------
// Likelihood ratio tests
// ---------------------------------------------------------------------------

inline void finish_chi2_test(TestResult& t, int df) {
  t.df1 = df;
  t.critical_value = chi2_quantile(df, t.alpha);
  t.p_value = chi2_sf(df, std::max(0.0, t.statistic));
  t.reject = t.statistic >= t.critical_value;
  t.approximate = true;
  t.notes.push_back("p-value from the chi-square(" + std::to_string(df) + ") approximation");
}

/// 2 [loglik(mu, gamma) + n log 2 pi] for a fully specified alternative.
inline TestResult lrt_uniformity_simple(const AngleSample& sample, double mu, double gamma, double alpha = 0.05) {
  check_alpha(alpha);
  TestResult t;
  t.method = TestMethod::lrt_uniformity;
  t.alpha = alpha;
  t.statistic = 2.0 * (pin_loglik(sample, mu, gamma) - pin_loglik(sample, mu, 0.0));
  finish_chi2_test(t, 2);
  return t;
}

/// 2 [loglik(mu_hat, gamma_hat) + n log 2 pi], referred to chi-square with 2 df.
inline TestResult lrt_uniformity(const AngleSample& sample, double alpha = 0.05) {
  check_alpha(alpha);
  if (sample.size() < 2) throw DomainError("lrt_uniformity: n must be >= 2");
  const auto fit = pin_mle(sample, MleMode::joint);
  TestResult t;
  t.method = TestMethod::lrt_uniformity;
  t.alpha = alpha;
  t.statistic = std::max(0.0, 2.0 * (fit.loglik - pin_loglik(sample, 0.0, 0.0)));
  finish_chi2_test(t, 2);
  if (fit.diagnostics.degenerate) t.notes.push_back(fit.diagnostics.note);
  return t;
}

/// Null hypothesis of the two-sample test.
///   identical:    both samples share (mu, gamma); 2 constraints
///   common_gamma: shared gamma, separate mean directions; 1 constraint
enum class TwoSampleNull { identical, common_gamma };

namespace detail {

inline AngleSample pooled(const AngleSample& a, const AngleSample& b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return AngleSample(std::move(all));
}

// sup over (mu1, mu2, gamma) of l1(mu1, gamma) + l2(mu2, gamma)
inline double common_gamma_loglik(const AngleSample& s1, const AngleSample& s2) {
  const auto start = pin_mle(pooled(s1, s2), MleMode::hybrid);
  double mu1 = circ_summary(s1).theta_bar, mu2 = circ_summary(s2).theta_bar;
  double gamma = start.gamma_hat;
  auto total = [&](double g) { return pin_loglik(s1, mu1, g) + pin_loglik(s2, mu2, g); };
  double ll = total(gamma);
  for (int sweep = 0; sweep < 200; ++sweep) {
    mu1 = maximize_mu(s1, mu1, gamma);
    mu2 = maximize_mu(s2, mu2, gamma);
    double hi = std::max(1.0, 2.0 * gamma);
    while (total(hi * (1.0 + 1e-6)) >= total(hi)) hi *= 2.0;
    std::uintmax_t iters = 500;
    const auto best = boost::math::tools::brent_find_minima([&](double g) { return -total(g); }, 0.0, hi, kBrentBits, iters);
    const double gain = -best.second - ll;
    gamma = best.first;
    ll = std::max(ll, -best.second);
    if (gain < 1e-12) break;
  }
  return ll;
}

}  // namespace detail

inline TestResult two_sample_lrt(const AngleSample& s1, const AngleSample& s2, double alpha = 0.05,
                                 TwoSampleNull null = TwoSampleNull::identical) {
  check_alpha(alpha);
  const auto f1 = pin_mle(s1, MleMode::joint);
  const auto f2 = pin_mle(s2, MleMode::joint);
  if (std::isinf(f1.gamma_hat) || std::isinf(f2.gamma_hat))
    throw DomainError("two_sample_lrt: a sample has Rbar = 1, likelihood unbounded");
  const double alt = f1.loglik + f2.loglik;
  double restricted = 0.0;
  int df = 2;
  if (null == TwoSampleNull::identical) {
    restricted = pin_mle(detail::pooled(s1, s2), MleMode::joint).loglik;
  } else {
    restricted = detail::common_gamma_loglik(s1, s2);
    df = 1;
  }
  TestResult t;
  t.method = TestMethod::two_sample_lrt;
  t.alpha = alpha;
  t.statistic = std::max(0.0, 2.0 * (alt - restricted));
  finish_chi2_test(t, df);
  t.notes.push_back(null == TwoSampleNull::identical ? "null: common (mu, gamma)" : "null: common gamma, separate mu");
  return t;
}

/// Upper quantile of F_{d1,d2}: x with P(F > x) = p.
inline double f_quantile_upper(double d1, double d2, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("f_quantile_upper: p must lie in (0, 1)");
  double lo = 0.0, hi = 1.0;
  while (f_sf(d1, d2, hi) > p) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 300 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f_sf(d1, d2, mid) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// (1 - Rbar2) / (1 - Rbar1) against F_{n1-1, n2-1}, upper tail.
inline TestResult two_sample_F(const CircularSummary& s1, const CircularSummary& s2, double alpha = 0.05) {
  check_alpha(alpha);
  if (s1.n < 2 || s2.n < 2) throw DomainError("two_sample_F: both samples need n >= 2");
  TestResult t;
  t.method = TestMethod::two_sample_f;
  t.alpha = alpha;
  t.df1 = static_cast<double>(s1.n) - 1.0;
  t.df2 = static_cast<double>(s2.n) - 1.0;
  t.approximate = true;
  t.critical_value = f_quantile_upper(t.df1, t.df2, alpha);
  if (s1.R_bar >= 1.0) {
    t.statistic = std::numeric_limits<double>::infinity();
    t.p_value = 0.0;
    t.reject = true;
    t.notes.push_back("Rbar1 = 1: statistic infinite");
    return t;
  }
  t.statistic = (1.0 - s2.R_bar) / (1.0 - s1.R_bar);
  t.p_value = f_sf(t.df1, t.df2, t.statistic);
  t.reject = t.statistic >= t.critical_value;
  if (s1.n != s2.n) t.notes.push_back("unequal sample sizes");
  return t;
}

// ---------------------------------------------------------------------------
// Confidence intervals
// ---------------------------------------------------------------------------

enum class IntervalTarget { kappa, gamma, csm };

inline const char* to_string(IntervalTarget t) {
  switch (t) {
    case IntervalTarget::kappa: return "kappa";
    case IntervalTarget::gamma: return "gamma";
    case IntervalTarget::csm: return "csm";
  }
  return "?";
}

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalTarget target = IntervalTarget::kappa;
  std::vector<std::string> warnings;
};

namespace detail {
inline double kappa_from_ratio(double a) { return (1.0 + std::sqrt(1.0 + 3.0 * a)) / (4.0 * a); }
}  // namespace detail

/// kappa_l = (1 + sqrt(1 + 3a)) / (4a), kappa_u likewise with b, where
/// a = (n - R) / chi2_{n-1} upper (1 - alpha/2) point, b = (n - R) / upper alpha/2 point.
inline ConfidenceInterval kappa_ci(double resultant, int n, double alpha = 0.05) {
  check_alpha(alpha);
  if (n < 2) throw DomainError("kappa_ci: n must be >= 2");
  if (!(resultant >= 0.0)) throw DomainError("kappa_ci: R must be >= 0");
  if (resultant >= n) throw DomainError("kappa_ci: R must be < n");
  const double spread = n - resultant;
  const double a = spread / chi2_quantile(n - 1, 1.0 - 0.5 * alpha, Tail::upper);
  const double b = spread / chi2_quantile(n - 1, 0.5 * alpha, Tail::upper);
  ConfidenceInterval ci;
  ci.level = 1.0 - alpha;
  ci.target = IntervalTarget::kappa;
  ci.lower = detail::kappa_from_ratio(a);
  ci.upper = detail::kappa_from_ratio(b);
  if (ci.lower > ci.upper) std::swap(ci.lower, ci.upper);
  const double kappa_hat = inv_A(resultant / n);
  if (kappa_hat < 2.0)
    ci.warnings.push_back("kappa_hat = " + std::to_string(kappa_hat) + " < 2: large-kappa interval is unreliable");
  return ci;
}

enum class GammaIntervalMode { divide_by_4, exact };

/// gamma interval from a kappa interval: kappa/4, or exact inversion of approx1_kappa.
inline ConfidenceInterval gamma_ci(const ConfidenceInterval& kappa_interval, GammaIntervalMode mode = GammaIntervalMode::divide_by_4) {
  if (kappa_interval.target != IntervalTarget::kappa) throw DomainError("gamma_ci: input must be a kappa interval");
  ConfidenceInterval ci = kappa_interval;
  ci.target = IntervalTarget::gamma;
  auto map = [mode](double kappa) {
    if (mode == GammaIntervalMode::divide_by_4) return kappa / 4.0;
    // approx1_kappa(gamma) = kappa  <=>  rho(gamma) = A(kappa)
    const double a = mean_resultant_A(kappa);
    return a >= 1.0 ? kappa / 4.0 : mom_gamma_approx1(a);
  };
  ci.lower = map(kappa_interval.lower);
  ci.upper = map(kappa_interval.upper);
  return ci;
}

/// CSM interval (rho(gamma_l)^2, rho(gamma_u)^2).
inline ConfidenceInterval csm_ci(const ConfidenceInterval& gamma_interval) {
  if (gamma_interval.target != IntervalTarget::gamma) throw DomainError("csm_ci: input must be a gamma interval");
  ConfidenceInterval ci = gamma_interval;
  ci.target = IntervalTarget::csm;
  ci.lower = csm_mle(gamma_interval.lower);
  ci.upper = csm_mle(gamma_interval.upper);
  return ci;
}

/// kappa -> gamma -> CSM interval for one sample.
inline ConfidenceInterval sample_csm_ci(const CircularSummary& summary, double alpha = 0.05,
                                       GammaIntervalMode mode = GammaIntervalMode::exact) {
  const int n = static_cast<int>(summary.n);
  return csm_ci(gamma_ci(kappa_ci(n * summary.R_bar, n, alpha), mode));
}

}  // namespace pinstat
