#pragma once

// Summary statistics and estimators for PIN samples.
//
//   hybrid MLE:  mu fixed at the sample mean direction, gamma by 1-D search
//   joint MLE:   coordinate ascent over (mu, gamma) from the hybrid start
//   MOM:         Rbar = rho(gamma)              (approx1 flavour)
//                Rbar = A(approx2_kappa(gamma)) (approx2 flavour)

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "pinstat/error.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/resultant.hpp"
#include "pinstat/special.hpp"
#include "pinstat/von_mises.hpp"

namespace pinstat {

struct CircularSummary {
  double C_bar = 0.0;
  double S_bar = 0.0;
  double R_bar = 0.0;
  double theta_bar = 0.0;  // meaningful only when direction_defined
  double csm = 0.0;
  std::size_t n = 0;
  bool direction_defined = false;
};

inline CircularSummary circ_summary(const AngleSample& sample) {
  CircularSummary s;
  s.n = sample.size();
  for (double t : sample) {
    s.C_bar += std::cos(t);
    s.S_bar += std::sin(t);
  }
  s.C_bar /= s.n;
  s.S_bar /= s.n;
  s.R_bar = std::min(1.0, std::hypot(s.C_bar, s.S_bar));
  s.csm = s.R_bar * s.R_bar;
  // below this Rbar is rounding noise of a balanced sample
  s.direction_defined = s.R_bar > 64.0 * std::numeric_limits<double>::epsilon();
  s.theta_bar = s.direction_defined ? std::atan2(s.S_bar, s.C_bar) : 0.0;
  return s;
}

inline double pin_loglik(const AngleSample& sample, double mu, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("pin_loglik: gamma must be finite and >= 0");
  if (gamma == 0.0) return -static_cast<double>(sample.size()) * std::log(2.0 * std::numbers::pi);
  const PinParams params(mu, gamma);
  double total = 0.0;
  for (double t : sample) total += pin_log_pdf(t, params);
  return total;
}

enum class MleMode { joint, hybrid };
enum class EstimationMethod { mle, hybrid, mom_approx1, mom_approx2 };

inline const char* to_string(EstimationMethod m) {
  switch (m) {
    case EstimationMethod::mle: return "mle";
    case EstimationMethod::hybrid: return "hybrid";
    case EstimationMethod::mom_approx1: return "mom_approx1";
    case EstimationMethod::mom_approx2: return "mom_approx2";
  }
  return "?";
}

struct ConvergenceRecord {
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double tolerance = 0.0;
  bool tolerance_met = true;
  // Rbar = 0 (gamma_hat = 0) or Rbar = 1 (gamma_hat = +inf)
  bool degenerate = false;
  std::string note;
};

struct EstimationResult {
  double mu_hat = 0.0;
  double gamma_hat = 0.0;
  EstimationMethod method = EstimationMethod::hybrid;
  double loglik = 0.0;
  ConvergenceRecord diagnostics;
};

// ---------------------------------------------------------------------------
// Moment estimators
// ---------------------------------------------------------------------------

namespace detail {

// Root of the increasing map g(gamma) = target on [0, inf), g(0) = 0.
template <class G>
double solve_increasing(G g, double target, double start_hi) {
  double lo = 0.0, hi = std::max(start_hi, 1e-8);
  int guard = 0;
  while (g(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 200) throw ConvergenceError("moment estimator: no upper bracket", hi, hi - lo);
  }
  for (int i = 0; i < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline void check_rbar_for_mom(double r_bar, const char* who) {
  if (!(r_bar >= 0.0)) throw DomainError(std::string(who) + ": Rbar must be >= 0");
  if (r_bar >= 1.0) throw DomainError(std::string(who) + ": Rbar must be < 1 (degenerate sample)");
}

}  // namespace detail

/// Solves Rbar = rho(gamma).
inline double mom_gamma_approx1(double r_bar) {
  detail::check_rbar_for_mom(r_bar, "mom_gamma_approx1");
  if (r_bar == 0.0) return 0.0;
  const double start = r_bar < 0.5 ? 2.0 * r_bar * r_bar / std::numbers::pi : 1.0 / (8.0 * (1.0 - r_bar));
  return detail::solve_increasing(pin_rho, r_bar, start);
}

/// Solves Rbar = A(approx2_kappa(gamma)).
inline double mom_gamma_approx2(double r_bar) {
  detail::check_rbar_for_mom(r_bar, "mom_gamma_approx2");
  if (r_bar == 0.0) return 0.0;
  const double start = r_bar < 0.5 ? 2.0 * r_bar * r_bar / std::numbers::pi : 1.0 / (8.0 * (1.0 - r_bar));
  return detail::solve_increasing([](double g) { return mean_resultant_A(approx2_kappa(g)); }, r_bar, start);
}

/// MLE of the CSM rho^2 given gamma_hat.
inline double csm_mle(double gamma_hat) {
  if (!(gamma_hat >= 0.0)) throw DomainError("csm_mle: gamma_hat must be >= 0");
  if (std::isinf(gamma_hat)) return 1.0;
  const double rho = pin_rho(gamma_hat);
  return rho * rho;
}

/// Small-sample correction of the von Mises kappa MLE.
inline double kappa_bias_correct(double kappa_hat, int n) {
  if (n < 2) throw DomainError("kappa_bias_correct: n must be >= 2");
  if (!(kappa_hat >= 0.0)) throw DomainError("kappa_bias_correct: kappa_hat must be >= 0");
  if (kappa_hat < 2.0) {
    if (kappa_hat == 0.0) return 0.0;
    return std::max(kappa_hat - 2.0 / (n * kappa_hat), 0.0);
  }
  const double nn = n;
  return (nn - 1.0) * (nn - 1.0) * (nn - 1.0) * kappa_hat / (nn * nn * nn + nn);
}

/// d rho / d gamma = sqrt(pi / (2 gamma)) e^{-gamma} I0(gamma) (1 - A(gamma)) / 2.
inline double pin_rho_derivative(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("pin_rho_derivative: gamma must be > 0");
  const double i0e = bessel_i0e(gamma);
  const double a = bessel_i1e(gamma) / i0e;
  return std::sqrt(std::numbers::pi / (2.0 * gamma)) * i0e * (1.0 - a) / 2.0;
}

enum class VarianceRegime { large_kappa, large_n, pin_moments };

/// Delta-method variance of gamma_MOM: var(Rbar) / (d rho / d gamma)^2, with var(Rbar)
///   large_kappa: 1 / (2 n kappa^2)
///   large_n:     (1 - A(kappa)^2 - A(kappa)/kappa) / n
///   pin_moments: (1 + alpha2 - 2 alpha^2) / (2n), the PIN's own variance of Cbar
/// and kappa = approx1_kappa(gamma).
inline double gamma_mom_variance(double gamma, int n, VarianceRegime regime) {
  if (!(gamma > 0.0)) throw DomainError("gamma_mom_variance: gamma must be > 0");
  if (n < 1) throw DomainError("gamma_mom_variance: n must be >= 1");
  const double kappa = approx1_kappa(gamma);
  double var_rbar = 0.0;
  switch (regime) {
    case VarianceRegime::large_kappa: var_rbar = 1.0 / (2.0 * n * kappa * kappa); break;
    case VarianceRegime::large_n: {
      const double a = mean_resultant_A(kappa);
      var_rbar = (1.0 - a * a - a / kappa) / n;
      break;
    }
    case VarianceRegime::pin_moments: var_rbar = rbar_asymptotics(gamma, n).var_C; break;
  }
  const double d = pin_rho_derivative(gamma);
  return var_rbar / (d * d);
}

// ---------------------------------------------------------------------------
// Maximum likelihood
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr int kBrentBits = std::numeric_limits<double>::digits / 2 + 4;

struct GammaMax {
  double gamma;
  double loglik;
  int iterations;
  double hi;
};

// argmax over gamma >= 0 of pin_loglik(sample, mu, gamma); the profile is unimodal
inline GammaMax maximize_gamma(const AngleSample& sample, double mu, double start_hi) {
  auto ll = [&](double g) { return pin_loglik(sample, mu, g); };
  double hi = std::max(1.0, start_hi);
  int doublings = 0;
  // extend until the profile is decreasing at hi
  while (ll(hi * (1.0 + 1e-6)) >= ll(hi)) {
    hi *= 2.0;
    if (++doublings > 60) throw ConvergenceError("pin_mle: gamma bracket did not close", hi, hi);
  }
  std::uintmax_t iters = 500;
  const auto best = boost::math::tools::brent_find_minima([&](double g) { return -ll(g); }, 0.0, hi, kBrentBits, iters);
  if (iters >= 500) throw ConvergenceError("pin_mle: Brent search did not converge", best.first, hi);
  return {best.first, -best.second, static_cast<int>(iters) + doublings, hi};
}

inline double maximize_mu(const AngleSample& sample, double mu0, double gamma) {
  std::uintmax_t iters = 500;
  const auto best = boost::math::tools::brent_find_minima([&](double m) { return -pin_loglik(sample, m, gamma); },
                                                          mu0 - 0.5 * std::numbers::pi, mu0 + 0.5 * std::numbers::pi,
                                                          kBrentBits, iters);
  return best.first;
}

}  // namespace detail

inline EstimationResult pin_mle(const AngleSample& sample, MleMode mode = MleMode::hybrid) {
  if (sample.size() < 2) throw DomainError("pin_mle: need at least 2 angles");
  const auto summary = circ_summary(sample);
  EstimationResult out;
  out.method = mode == MleMode::hybrid ? EstimationMethod::hybrid : EstimationMethod::mle;
  out.mu_hat = summary.theta_bar;
  out.diagnostics.tolerance = std::ldexp(1.0, 1 - detail::kBrentBits);

  if (!summary.direction_defined) {
    out.gamma_hat = 0.0;
    out.loglik = pin_loglik(sample, 0.0, 0.0);
    out.diagnostics.degenerate = true;
    out.diagnostics.note = "Rbar = 0: mean direction undefined, gamma_hat = 0";
    return out;
  }
  const bool all_equal = std::all_of(sample.begin(), sample.end(), [&](double t) { return t == sample[0]; });
  if (all_equal || summary.R_bar >= 1.0) {
    out.gamma_hat = std::numeric_limits<double>::infinity();
    out.loglik = std::numeric_limits<double>::infinity();
    out.diagnostics.degenerate = true;
    out.diagnostics.note = "Rbar = 1: likelihood unbounded, gamma_hat = +inf";
    return out;
  }

  const double start_hi = 2.0 * mom_gamma_approx1(summary.R_bar);
  auto g = detail::maximize_gamma(sample, out.mu_hat, start_hi);
  out.gamma_hat = g.gamma;
  out.loglik = g.loglik;
  out.diagnostics.iterations = g.iterations;
  out.diagnostics.bracket_hi = g.hi;
  if (mode == MleMode::hybrid) return out;

  double mu = out.mu_hat, gamma = out.gamma_hat, ll = out.loglik;
  int sweep = 0;
  for (; sweep < 200; ++sweep) {
    const double mu_new = detail::maximize_mu(sample, mu, gamma);
    const auto gm = detail::maximize_gamma(sample, mu_new, 2.0 * gamma);
    const double gain = gm.loglik - ll;
    const bool moved = std::abs(mu_new - mu) > 1e-10 || std::abs(gm.gamma - gamma) > 1e-10 * (1.0 + gamma);
    if (gain >= 0.0) {
      mu = mu_new;
      gamma = gm.gamma;
      ll = gm.loglik;
    }
    out.diagnostics.bracket_hi = gm.hi;
    if (gain < 1e-12 || !moved) break;
  }
  out.diagnostics.iterations += sweep;
  out.diagnostics.tolerance_met = sweep < 200;
  out.mu_hat = normalize_angle(mu);
  out.gamma_hat = gamma;
  out.loglik = ll;
  return out;
}

}  // namespace pinstat
