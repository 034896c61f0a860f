#pragma once

// Sampling distributions of the resultant R = n Rbar and of CSM = Rbar^2.
//
//   uniform:    h_n(R) = R * int_0^inf u J0(R u) J0(u)^n du,   0 < R < n
//   von Mises:  p(R)   = I0(kappa R) / I0(kappa)^n * h_n(R)
//   CSM:        v = R^2 / n^2,  p(v) = p_R(n sqrt v) * n / (2 sqrt v)
//
// pin_approx1 plugs kappa = approx1_kappa(gamma) into the von Mises form.
// For n = 2 the closed form h_2(R) = 2 / (pi sqrt(4 - R^2)) is used directly.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "pinstat/error.hpp"
#include "pinstat/parallel.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/rng.hpp"
#include "pinstat/special.hpp"
#include "pinstat/von_mises.hpp"

namespace pinstat {

enum class ResultantModelKind { uniform, von_mises, pin_approx1 };

struct ResultantModel {
  ResultantModelKind kind = ResultantModelKind::uniform;
  double parameter = 0.0;  // kappa for von_mises, gamma for pin_approx1

  static ResultantModel uniform() { return {}; }
  static ResultantModel von_mises(double kappa) { return {ResultantModelKind::von_mises, kappa}; }
  static ResultantModel pin_approx1(double gamma) { return {ResultantModelKind::pin_approx1, gamma}; }

  /// Concentration of the von Mises law actually used.
  double kappa() const {
    switch (kind) {
      case ResultantModelKind::uniform: return 0.0;
      case ResultantModelKind::von_mises: return parameter;
      case ResultantModelKind::pin_approx1: return approx1_kappa(parameter);
    }
    return 0.0;
  }
};

inline QuadratureSpec default_resultant_quadrature() { return {1e-13, 1e-10, 4000, Acceleration::sequence_acceleration}; }

struct ResultantDensitySpec {
  int n = 2;
  ResultantModel model{};
  QuadratureSpec quadrature = default_resultant_quadrature();

  void validate() const {
    if (n < 2) throw DomainError("ResultantDensitySpec: n must be >= 2");
    if (!(model.parameter >= 0.0) || !std::isfinite(model.parameter))
      throw DomainError("ResultantDensitySpec: kappa/gamma must be finite and >= 0");
    quadrature.validate();
  }
};

namespace detail {

inline double int_pow(double x, int n) {
  double result = 1.0;
  for (; n > 0; n >>= 1, x *= x)
    if (n & 1) result *= x;
  return result;
}

// sum_k (+-i)^k a_k / z^k with a_k = prod_{j<=k} -(2j-1)^2 / (8j), so that
// H0^(1,2)(z) ~ sqrt(2 / (pi z)) exp(+-i (z - pi/4)) hankel_series(z, +-1)
inline std::complex<double> hankel_series(std::complex<double> z, int sign) {
  const std::complex<double> step(0.0, static_cast<double>(sign));
  std::complex<double> sum = 1.0, term = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const auto next = term * step * (-odd * odd / (8.0 * k)) / z;
    const double size = std::abs(next);
    if (size >= prev) break;
    term = next;
    sum += term;
    prev = size;
    if (size < 1e-17) break;
  }
  return sum;
}

// int_U^inf u J0(R u) J0(u)^n du. Both Bessel factors are split into their Hankel
// halves; each product term exp(i w u) g(u) is integrated along U + i t sign(w),
// where it decays like exp(-|w| t). Terms come in conjugate pairs, so only
// w > 0 (and w = 0 with the + half of J0(R u)) are summed and doubled.
inline double resultant_kernel_tail(double r, int n, double upper, const QuadratureSpec& spec) {
  using C = std::complex<double>;
  const double pi = std::numbers::pi;
  std::vector<double> binom(n + 1);  // C(n, k) / 2^(n+1)
  binom[0] = std::ldexp(1.0, -(n + 1));
  for (int k = 1; k <= n; ++k) binom[k] = binom[k - 1] * (n - k + 1) / k;
  struct Term {
    int sigma, k;
    double omega;
  };
  std::vector<Term> terms;
  for (int sigma : {1, -1})
    for (int k = 0; k <= n; ++k) {
      const double w = sigma * r + 2 * k - n;
      if (w > 0.0 || (w == 0.0 && sigma == 1)) terms.push_back({sigma, k, w});
    }
  auto im_integrand = [&](double t) {
    const C u(upper, t);
    const C sp = hankel_series(u, 1), sm = hankel_series(u, -1);
    const C amp = u * std::sqrt(2.0 / (pi * r * u)) * std::pow(std::sqrt(2.0 / (pi * u)), n);
    const C rp = hankel_series(r * u, 1), rm = hankel_series(r * u, -1);
    C total = 0.0;
    for (const auto& term : terms) {
      const C phase = std::exp(C(0.0, 1.0) * (term.omega * u - 0.25 * pi * (term.sigma + 2 * term.k - n)));
      total += binom[term.k] * (term.sigma > 0 ? rp : rm) * std::pow(sp, term.k) * std::pow(sm, n - term.k) * phase;
    }
    // du = i dt along the ray
    return (C(0.0, 1.0) * amp * total).real();
  };
  QuadratureSpec inner = spec;
  inner.abs_tol = 0.1 * spec.abs_tol;
  return 2.0 * integrate(im_integrand, 0.0, std::numeric_limits<double>::infinity(), inner).value;
}

// Even n, small R. J0(u)^n has a non-oscillating part D(u) ~ u^(-n/2) which only
// the slow J0(R u) cuts off (for n = 4 the result grows like -log R). Past u = 32
// it is split off and integrated over the zeros of J0(R u); the rest oscillates
// at frequency >= 2 - R and accelerates normally.
inline double resultant_kernel_small_r(double r, int n, const QuadratureSpec& spec) {
  const double pi = std::numbers::pi, upper = 32.0;
  double middle = 1.0;  // C(n, n/2) / 2^n
  for (int k = 1; k <= n / 2; ++k) middle *= (n / 2.0 + k) / (4.0 * k);
  auto dc = [=](double u) {
    const std::complex<double> z(u, 0.0);
    const double s2 = std::norm(hankel_series(z, 1));
    return middle * std::pow(2.0 * s2 / (pi * u), n / 2);
  };
  QuadratureSpec inner = spec;
  inner.abs_tol = 0.1 * spec.abs_tol;
  auto integrand = [r, n](double u) { return u * bessel_j0(r * u) * int_pow(bessel_j0(u), n); };
  double head = 0.0, left = 0.0;
  for (int k = 1; left < upper; ++k) {
    const double right = std::min(bessel_j0_zero(k), upper);
    head += integrate(integrand, left, right, inner).value;
    left = right;
  }
  int skip = 0;  // zeros of J0(u) below the cut
  while (bessel_j0_zero(skip + 1) <= upper) ++skip;
  auto rest = [&](double u) { return u * bessel_j0(r * u) * (int_pow(bessel_j0(u), n) - dc(u)); };
  const double wiggle =
      integrate_oscillatory(rest, upper, [skip](int k) { return bessel_j0_zero(k + skip); }, spec).value;
  int skip_r = 0;
  while (bessel_j0_zero(skip_r + 1) / r <= upper) ++skip_r;
  auto slow = [&](double u) { return u * bessel_j0(r * u) * dc(u); };
  const double drift =
      integrate_oscillatory(slow, upper, [skip_r, r](int k) { return bessel_j0_zero(k + skip_r) / r; }, spec).value;
  return head + wiggle + drift;
}

/// int_0^inf u J0(R u) J0(u)^n du, i.e. h_n(R) / R.
inline double resultant_kernel(double r, int n, const QuadratureSpec& spec) {
  if (n == 2) return 2.0 / (std::numbers::pi * r * std::sqrt(4.0 - r * r));
  auto integrand = [r, n](double u) { return u * bessel_j0(r * u) * int_pow(bessel_j0(u), n); };
  // cycles follow the faster of the two oscillations
  const double scale = std::max(r, 1.0);
  auto breakpoint = [scale](int k) { return bessel_j0_zero(k) / scale; };
  if (r < 0.25 && n % 2 == 1) return integrate_oscillatory(integrand, 0.0, breakpoint, spec).value;
  if (r < 0.25) return resultant_kernel_small_r(r, n, spec);

  // beats at frequencies |R - (n - 2k)| stall series acceleration near R = n - 2k,
  // so integrate directly to U and take the tail from the Hankel expansion
  const double upper = 32.0 / std::min(r, 1.0);
  QuadratureSpec inner = spec;
  inner.abs_tol = 0.1 * spec.abs_tol;
  double head = 0.0, left = 0.0;
  for (int k = 1; left < upper; ++k) {
    const double right = std::min(breakpoint(k), upper);
    head += integrate(integrand, left, right, inner).value;
    left = right;
  }
  return head + resultant_kernel_tail(r, n, upper, spec);
}

inline void check_resultant_range(double r, int n) {
  if (n < 2) throw DomainError("resultant density: n must be >= 2");
  if (!(r > 0.0 && r < n)) throw DomainError("resultant density: R must lie in (0, n)");
}

// log I0(kappa R) - n log I0(kappa)
inline double von_mises_log_weight(double r, int n, double kappa) {
  if (kappa == 0.0) return 0.0;
  return log_bessel_i0(kappa * r) - n * log_bessel_i0(kappa);
}

}  // namespace detail

/// h_n(R): density of the resultant length of n independent uniform angles.
inline double uniform_resultant_pdf(double r, int n, const QuadratureSpec& spec = default_resultant_quadrature()) {
  detail::check_resultant_range(r, n);
  if (n == 2) return 2.0 / (std::numbers::pi * std::sqrt(4.0 - r * r));
  return std::max(0.0, r * detail::resultant_kernel(r, n, spec));
}

/// Density of R for a von Mises(kappa) sample of size n.
inline double vm_resultant_pdf(double r, int n, double kappa, const QuadratureSpec& spec = default_resultant_quadrature()) {
  if (!(kappa >= 0.0)) throw DomainError("vm_resultant_pdf: kappa must be >= 0");
  detail::check_resultant_range(r, n);
  return std::exp(detail::von_mises_log_weight(r, n, kappa)) * uniform_resultant_pdf(r, n, spec);
}

/// Density of R under the model in spec.
inline double resultant_pdf(double r, const ResultantDensitySpec& spec) {
  spec.validate();
  return vm_resultant_pdf(r, spec.n, spec.model.kappa(), spec.quadrature);
}

namespace detail {

inline double csm_pdf_with_kappa(double v, int n, double kappa, const QuadratureSpec& spec) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError("csm_pdf: v must lie in (0, 1)");
  const double r = n * std::sqrt(v);
  // p(v) = (n^2 / 2) * weight(R) * int u J0(R u) J0(u)^n du
  const double kernel = resultant_kernel(r, n, spec);
  return std::max(0.0, 0.5 * n * n * std::exp(von_mises_log_weight(r, n, kappa)) * kernel);
}

}  // namespace detail

/// Density of CSM = Rbar^2 on (0, 1).
inline double csm_pdf(double v, const ResultantDensitySpec& spec) {
  spec.validate();
  return detail::csm_pdf_with_kappa(v, spec.n, spec.model.kappa(), spec.quadrature);
}

// ---------------------------------------------------------------------------
// Stephens large-kappa approximation: 2 n gamma* (1 - Rbar) ~ chi2_{n-1}
// ---------------------------------------------------------------------------

inline double stephens_gamma_star(double kappa) {
  if (!(kappa > 0.0)) throw DomainError("stephens_gamma_star: kappa must be > 0");
  return 1.0 / (1.0 / kappa + 3.0 / (8.0 * kappa * kappa));
}

struct StephensResult {
  double statistic;
  double gamma_star;
  bool below_validity;  // kappa < 4, where the approximation is not recommended
};

inline StephensResult stephens_transform(double r_bar, int n, double kappa) {
  if (!(r_bar >= 0.0 && r_bar <= 1.0)) throw DomainError("stephens_transform: Rbar must lie in [0, 1]");
  if (n < 2) throw DomainError("stephens_transform: n must be >= 2");
  const double g = stephens_gamma_star(kappa);
  return {2.0 * n * g * (1.0 - r_bar), g, kappa < 4.0};
}

// ---------------------------------------------------------------------------
// n = 2: general convolution and the cosine-dependence model
// ---------------------------------------------------------------------------

/// Density of R for two angles with joint density f(theta1, theta2):
/// 4 int_0^{2 pi} f(u - t, u + t) du / sqrt(4 - R^2), t = arccos(R / 2).
inline double n2_resultant_pdf_joint(double r, const std::function<double(double, double)>& joint,
                                     const QuadratureSpec& spec = {1e-12, 1e-12, 2000}) {
  if (!(r > 0.0 && r < 2.0)) throw DomainError("n2_resultant_pdf: R must lie in (0, 2)");
  const double t = std::acos(0.5 * r);
  auto integrand = [&](double u) { return joint(u - t, u + t); };
  const double total = integrate(integrand, 0.0, 2.0 * std::numbers::pi, spec).value;
  return 4.0 * total / std::sqrt(4.0 - r * r);
}

/// Independent pair from the circular density f.
inline double n2_resultant_pdf(double r, const std::function<double(double)>& density,
                               const QuadratureSpec& spec = {1e-12, 1e-12, 2000}) {
  return n2_resultant_pdf_joint(r, [&](double a, double b) { return density(a) * density(b); }, spec);
}

struct CosineDependenceParams {
  double lambda = 0.0;
};

/// Joint density exp{lambda cos(theta1 - theta2)} / ((2 pi)^2 I0(lambda)).
inline double cosine_joint_pdf(double theta1, double theta2, const CosineDependenceParams& p) {
  const double a = std::abs(p.lambda);
  return std::exp(p.lambda * std::cos(theta1 - theta2) - a) /
         (4.0 * std::numbers::pi * std::numbers::pi * bessel_i0e(a));
}

/// Closed form for the cosine model: 2 exp{lambda cos 2t} / (pi I0(lambda) sqrt(4 - R^2)),
/// with cos 2t = R^2/2 - 1.
inline double n2_resultant_pdf_cosine(double r, const CosineDependenceParams& p) {
  if (!(r > 0.0 && r < 2.0)) throw DomainError("n2_resultant_pdf_cosine: R must lie in (0, 2)");
  if (!std::isfinite(p.lambda)) throw DomainError("n2_resultant_pdf_cosine: lambda must be finite");
  const double a = std::abs(p.lambda);
  // exp(lambda c) / I0(lambda) = exp(lambda c - |lambda|) / I0e(|lambda|)
  const double log_num = p.lambda * (0.5 * r * r - 1.0) - a;
  return 2.0 * std::exp(log_num) / (std::numbers::pi * bessel_i0e(a) * std::sqrt(4.0 - r * r));
}

// ---------------------------------------------------------------------------
// Large-n moments
// ---------------------------------------------------------------------------

struct AsymptoticMoments {
  double mean_C, mean_S, var_C, var_S;
  double mean_Rbar, mean_CSM, var_Rbar, var_CSM;
};

/// Large-n moments of (Cbar, Sbar) under PIN(gamma):
///   E Cbar = alpha, var Cbar = (1 + alpha2 - 2 alpha^2) / (2n), var Sbar = (1 - alpha2) / (2n).
/// At gamma = 0 the Rbar/CSM fields are E Rbar = sqrt(pi/(4n)), E Rbar^2 = 1/n,
/// var Rbar = (1 - pi/4)/n, var Rbar^2 = 1/n^2; for gamma > 0 they are the
/// delta-method values around alpha.
inline AsymptoticMoments rbar_asymptotics(double gamma, int n) {
  if (n < 1) throw DomainError("rbar_asymptotics: n must be >= 1");
  if (!(gamma >= 0.0)) throw DomainError("rbar_asymptotics: gamma must be >= 0");
  const double alpha = pin_rho(gamma);
  const double alpha2 = pin_cos_moment(2, gamma);
  AsymptoticMoments m{};
  m.mean_C = alpha;
  m.mean_S = 0.0;
  m.var_C = (1.0 + alpha2 - 2.0 * alpha * alpha) / (2.0 * n);
  m.var_S = (1.0 - alpha2) / (2.0 * n);
  if (gamma == 0.0) {
    m.mean_Rbar = std::sqrt(std::numbers::pi / (4.0 * n));
    m.mean_CSM = 1.0 / n;
    m.var_Rbar = (1.0 - std::numbers::pi / 4.0) / n;
    m.var_CSM = 1.0 / (static_cast<double>(n) * n);
  } else {
    m.mean_Rbar = alpha;
    m.var_Rbar = m.var_C;
    m.mean_CSM = alpha * alpha + m.var_C + m.var_S;
    m.var_CSM = 4.0 * alpha * alpha * m.var_C;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// CSM = Rbar^2 of n PIN(0, gamma) angles, for reps replicates.
/// Replicate r draws from RandomStream(seed, r), so the output does not depend on `threads`.
inline std::vector<double> monte_carlo_csm(double gamma, int n, std::size_t reps, std::uint64_t seed,
                                           unsigned threads = default_thread_count()) {
  if (reps < 1) throw DomainError("monte_carlo_csm: reps must be >= 1");
  if (n < 1) throw DomainError("monte_carlo_csm: n must be >= 1");
  const PinParams params(0.0, gamma);
  std::vector<double> out(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RandomStream rng(seed, r);
    const double shift = 2.0 * std::sqrt(params.gamma);
    double c = 0.0, s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = shift + rng.normal();
      const double y = rng.normal();
      const double theta = std::atan2(y, x);
      c += std::cos(theta);
      s += std::sin(theta);
    }
    c /= n;
    s /= n;
    out[r] = std::min(1.0, c * c + s * s);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Distribution function tables for goodness-of-fit checks
// ---------------------------------------------------------------------------

/// CDF of R under a resultant model, tabulated on a uniform grid of (0, n) and
/// interpolated with cubic Hermite pieces (the density gives the slopes).
class ResultantCdf {
 public:
  explicit ResultantCdf(const ResultantDensitySpec& spec, int cells = 400, unsigned threads = default_thread_count())
      : n_(spec.n), h_(static_cast<double>(spec.n) / cells), cdf_(cells + 1, 0.0), pdf_(cells + 1, 0.0) {
    spec.validate();
    const double kappa = spec.model.kappa();
    // 5-point Gauss-Legendre per cell
    static constexpr std::array<double, 5> x = {-0.906179845938663992797626878299, -0.538469310105683091036314420700,
                                                0.0, 0.538469310105683091036314420700, 0.906179845938663992797626878299};
    static constexpr std::array<double, 5> w = {0.236926885056189087514264040720, 0.478628670499366468041291514836,
                                                0.568888888888888888888888888889, 0.478628670499366468041291514836,
                                                0.236926885056189087514264040720};
    std::vector<double> mass(cells, 0.0);
    auto density = [&](double r) { return vm_resultant_pdf(r, n_, kappa, spec.quadrature); };
    parallel_for(static_cast<std::size_t>(cells), threads, [&](std::size_t i) {
      const double a = i * h_, mid = a + 0.5 * h_;
      double sum = 0.0;
      for (int k = 0; k < 5; ++k) sum += w[k] * density(mid + 0.5 * h_ * x[k]);
      mass[i] = 0.5 * h_ * sum;
      if (i > 0) pdf_[i] = density(a);
    });
    for (int i = 0; i < cells; ++i) cdf_[i + 1] = cdf_[i] + mass[i];
    total_ = cdf_.back();
    for (double& c : cdf_) c /= total_;
    for (double& p : pdf_) p /= total_;
  }

  /// Integral of the density over (0, n) before renormalisation.
  double raw_total() const { return total_; }

  double operator()(double r) const {
    if (r <= 0.0) return 0.0;
    if (r >= n_) return 1.0;
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(r / h_), cdf_.size() - 2);
    const double t = (r - i * h_) / h_;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return std::clamp(h00 * cdf_[i] + h10 * h_ * pdf_[i] + h01 * cdf_[i + 1] + h11 * h_ * pdf_[i + 1], 0.0, 1.0);
  }

  /// CDF of CSM = (R/n)^2.
  double csm(double v) const { return (*this)(n_ * std::sqrt(std::max(0.0, v))); }

 private:
  int n_;
  double h_;
  double total_ = 1.0;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
};

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, const Cdf& cdf) {
  if (sample.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / m - f, f - i / m});
  }
  return d;
}

/// Asymptotic Kolmogorov p-value for distance d from m observations
/// (Stephens' finite-sample correction to the argument).
inline double ks_p_value(double d, std::size_t m) {
  const double sm = std::sqrt(static_cast<double>(m));
  const double lambda = (sm + 0.12 + 0.11 / sm) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace pinstat
