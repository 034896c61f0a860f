#pragma once

// Special functions and numeric kernels shared by the statistical modules.
//
// Conventions:
//   * bessel_i(nu, z, scaled) returns I_nu(z), or exp(-z) I_nu(z) when scaled.
//     Orders are non-negative reals plus nu = -1/2.
//   * chi2_quantile defaults to the upper-tail convention used for critical
//     values: it returns x with P(chi2_df > x) = p.
//   * integrate() is adaptive 21-point Gauss-Kronrod with global bisection.
//     integrate_oscillatory() sums a semi-infinite integral over caller-supplied
//     breakpoints and accelerates the partial sums with Wynn's epsilon algorithm.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "pinstat/error.hpp"

namespace pinstat {

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

struct NormalValues {
  double pdf;
  double cdf;
};

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline NormalValues normal_pdf_cdf(double x) {
  if (!std::isfinite(x)) throw DomainError("normal_pdf_cdf: non-finite argument");
  return {normal_pdf(x), normal_cdf(x)};
}

/// Inverse of normal_cdf by bisection; accurate to a few ulps of the cdf.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

// Mills ratio Phi(-t)/phi(t) for t > 0 by a backward continued fraction,
// together with D(t) = t + 2/(t + 3/(t + ...)) so that 1 - t*m(t) = m(t)/D(t).
struct MillsParts {
  double mills;
  double tail;  // D(t)
};

inline MillsParts mills_parts(double t) {
  double d = t;
  for (int k = 120; k >= 2; --k) d = t + k / d;
  return {1.0 / (t + 1.0 / d), d};
}

}  // namespace detail

/// log(phi(x) + x Phi(x)). This bracket is the angular factor of the projected
/// normal density; the continued fraction keeps it accurate far in the left tail.
inline double log_phi_plus_x_Phi(double x) {
  if (x >= -5.0) return std::log(normal_pdf(x) + x * normal_cdf(x));
  const double t = -x;
  const auto [mills, tail] = detail::mills_parts(t);
  return -0.5 * t * t - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(mills) - std::log(tail);
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind
// ---------------------------------------------------------------------------

namespace detail {

inline void check_bessel_i_order(double nu) {
  if (!std::isfinite(nu) || (nu < 0.0 && nu != -0.5))
    throw DomainError("bessel_i: order must be >= 0 or exactly -1/2");
}

// Ascending series sum_m (z/2)^(2m+nu) / (m! Gamma(m+nu+1)), times exp(-z) when scaled.
inline double bessel_i_series(double nu, double z, bool scaled) {
  const double half = 0.5 * z;
  const double log_t0 = nu * std::log(half) - std::lgamma(nu + 1.0) - (scaled ? z : 0.0);
  double term = std::exp(log_t0);
  double sum = term;
  const double q = half * half;
  for (int m = 1; m < 100000; ++m) {
    term *= q / (m * (m + nu));
    sum += term;
    if (term < 1e-17 * sum && m > half) break;
  }
  return sum;
}

// Hankel expansion exp(-z) I_nu(z) ~ (2 pi z)^(-1/2) sum_k (-1)^k a_k(nu) / z^k.
inline double bessel_i_scaled_asymptotic(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) >= std::abs(term) && k > 1) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

}  // namespace detail

/// I_nu(z) for z >= 0; exp(-z) I_nu(z) when scaled. Series for z <= 30,
/// Hankel expansion (always scaled internally) beyond.
inline double bessel_i(double nu, double z, bool scaled = false) {
  detail::check_bessel_i_order(nu);
  if (!(z >= 0.0)) throw DomainError("bessel_i: argument must be >= 0");
  if (z == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu < 0.0) return std::numeric_limits<double>::infinity();
    return 0.0;
  }
  if (std::isinf(z)) return scaled ? 0.0 : std::numeric_limits<double>::infinity();
  if (z <= 30.0 || nu * nu > 0.25 * z) return detail::bessel_i_series(nu, z, scaled);
  const double s = detail::bessel_i_scaled_asymptotic(nu, z);
  return scaled ? s : s * std::exp(z);
}

/// exp(-z) I_0(z).
inline double bessel_i0e(double z) { return bessel_i(0.0, z, true); }
/// exp(-z) I_1(z).
inline double bessel_i1e(double z) { return bessel_i(1.0, z, true); }

/// log I_0(z), finite for every z >= 0.
inline double log_bessel_i0(double z) { return z + std::log(bessel_i0e(z)); }

// ---------------------------------------------------------------------------
// Bessel functions of the first kind, orders 0 and 1
// ---------------------------------------------------------------------------

namespace detail {

// J_n(z) = (1/M) sum_k cos(z sin t_k - n t_k) on a full period; the trapezoid
// error is O(J_{M-n}(z)), negligible once M exceeds z by a few dozen.
inline double bessel_j_trapezoid(int n, double z) {
  const int m = 2 * static_cast<int>(std::ceil(0.5 * z)) + 48;
  const double h = 2.0 * std::numbers::pi / m;
  double sum = 0.0;
  for (int k = 0; k < m; ++k) {
    const double t = h * k;
    sum += std::cos(z * std::sin(t) - n * t);
  }
  return sum / m;
}

inline double bessel_j_series(int n, double z) {
  const long double q = -0.25L * static_cast<long double>(z) * z;
  long double term = n == 0 ? 1.0L : 0.5L * z;
  long double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (std::abs(term) < 1e-21L) break;
  }
  return static_cast<double>(sum);
}

inline double bessel_j_asymptotic(int n, double z) {
  const double mu = 4.0 * n * n;
  double p = 1.0, q = 0.0, term = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (k * 8.0 * z);
    if (std::abs(next) >= std::abs(term) && k > 2) break;
    term = next;
    // a_k / z^k with sign (-1)^floor(k/2) contributes to Q (k odd) or P (k even)
    const double signed_term = ((k / 2) % 2 == 0) ? term : -term;
    (k % 2 == 0 ? p : q) += signed_term;
    if (std::abs(term) < 1e-18) break;
  }
  const double chi = z - (0.5 * n + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * z)) * (p * std::cos(chi) - q * std::sin(chi));
}

inline double bessel_j(int n, double z) {
  if (z <= 8.0) return bessel_j_series(n, z);
  if (z <= 25.0) return bessel_j_trapezoid(n, z);
  return bessel_j_asymptotic(n, z);
}

}  // namespace detail

inline double bessel_j0(double z) {
  if (!(z >= 0.0)) throw DomainError("bessel_j0: argument must be >= 0");
  return detail::bessel_j(0, z);
}

inline double bessel_j1(double z) {
  if (!(z >= 0.0)) throw DomainError("bessel_j1: argument must be >= 0");
  return detail::bessel_j(1, z);
}

/// s-th positive zero of J_0 (s >= 1): McMahon's expansion refined by Newton.
inline double bessel_j0_zero(int s) {
  if (s < 1) throw DomainError("bessel_j0_zero: index must be >= 1");
  const double beta = (s - 0.25) * std::numbers::pi;
  const double e = 8.0 * beta;
  double x = beta + 1.0 / e - 124.0 / (3.0 * e * e * e) + 120928.0 / (15.0 * std::pow(e, 5));
  for (int i = 0; i < 3; ++i) x += detail::bessel_j(0, x) / detail::bessel_j(1, x);
  return x;
}

// ---------------------------------------------------------------------------
// von Mises mean resultant function A(kappa) = I_1(kappa) / I_0(kappa)
// ---------------------------------------------------------------------------

inline double mean_resultant_A(double kappa) {
  if (!(kappa >= 0.0)) throw DomainError("mean_resultant_A: kappa must be >= 0");
  if (kappa == 0.0) return 0.0;
  if (std::isinf(kappa)) return 1.0;
  return bessel_i1e(kappa) / bessel_i0e(kappa);
}

/// Inverse of A on [0, 1): piecewise rational start, safeguarded Newton polish.
inline double inv_A(double r) {
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("inv_A: r must lie in [0, 1)");
  if (r == 0.0) return 0.0;
  double k;
  if (r < 0.53)
    k = 2.0 * r + r * r * r + 5.0 * std::pow(r, 5) / 6.0;
  else if (r < 0.85)
    k = -0.4 + 1.39 * r + 0.43 / (1.0 - r);
  else
    k = 1.0 / (r * r * r - 4.0 * r * r + 3.0 * r);

  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double a = mean_resultant_A(k);
    const double f = a - r;
    (f < 0.0 ? lo : hi) = k;
    if (std::abs(f) <= 1e-15 * r) break;
    const double slope = 1.0 - a / k - a * a;
    double next = k - f / slope;
    if (!(next > lo && next < hi) || !(slope > 0.0)) next = std::isinf(hi) ? 2.0 * k : 0.5 * (lo + hi);
    if (std::abs(next - k) <= 4e-16 * k) {
      k = next;
      break;
    }
    k = next;
  }
  return k;
}

// ---------------------------------------------------------------------------
// Incomplete gamma / chi-square, incomplete beta / F
// ---------------------------------------------------------------------------

namespace detail {

// Returns {P(a, x), Q(a, x)}.
inline std::array<double, 2> incomplete_gamma(double a, double x) {
  if (x <= 0.0) return {0.0, 1.0};
  const double log_front = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    const double p = std::min(1.0, sum * std::exp(log_front));
    return {p, 1.0 - p};
  }
  // Lentz continued fraction for Q
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double q = std::min(1.0, std::exp(log_front) * h);
  return {1.0 - q, q};
}

inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m < 10000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace detail

inline double chi2_cdf(int df, double x) {
  if (df < 1) throw DomainError("chi2_cdf: df must be >= 1");
  return detail::incomplete_gamma(0.5 * df, 0.5 * x)[0];
}

inline double chi2_sf(int df, double x) {
  if (df < 1) throw DomainError("chi2_sf: df must be >= 1");
  return detail::incomplete_gamma(0.5 * df, 0.5 * x)[1];
}

enum class Tail { lower, upper };

/// Chi-square quantile by bisection on the regularised incomplete gamma.
/// Tail::upper returns x with P(chi2_df > x) = p; Tail::lower with P(chi2_df <= x) = p.
inline double chi2_quantile(int df, double p, Tail tail = Tail::upper) {
  if (df < 1) throw DomainError("chi2_quantile: df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");
  if (df == 2) return tail == Tail::upper ? -2.0 * std::log(p) : -2.0 * std::log1p(-p);
  // g(x) is increasing in x
  auto g = [&](double x) { return tail == Tail::upper ? p - chi2_sf(df, x) : chi2_cdf(df, x) - p; };
  double lo = 0.0, hi = std::max(1.0, 2.0 * df);
  while (g(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 300 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Regularised incomplete beta I_x(a, b).
inline double beta_inc(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta_inc: shape parameters must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("beta_inc: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper tail P(F_{d1,d2} > x).
inline double f_sf(double d1, double d2, double x) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("f_sf: degrees of freedom must be > 0");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return beta_inc(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

enum class Acceleration { none, sequence_acceleration };

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  Acceleration acceleration = Acceleration::sequence_acceleration;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1)
      throw DomainError("QuadratureSpec: tolerances must be > 0 and max_subdivisions >= 1");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

struct KronrodSegment {
  double a, b, value, error;
  bool operator<(const KronrodSegment& o) const { return error < o.error; }
};

// QUADPACK qk21 abscissae and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208805877190, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <class F>
KronrodSegment gauss_kronrod_21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[10];
  double gauss = 0.0;
  double resabs = std::abs(kronrod);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double s = f1[j] + f2[j];
    kronrod += kWgk[j] * s;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  const double mean = 0.5 * kronrod;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  kronrod *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((kronrod - gauss * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, kronrod, err};
}

// Wynn epsilon extrapolation of a sequence of partial sums; returns the
// last entry of the highest even column that could be formed.
inline double wynn_epsilon(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n < 3) return s.back();
  std::vector<double> prev(n, 0.0), cur(s);
  double best = s.back();
  for (std::size_t col = 1; col < n; ++col) {
    std::vector<double> next(n - col);
    for (std::size_t i = 0; i + col < n; ++i) {
      const double diff = cur[i + 1] - cur[i];
      if (diff == 0.0 || !std::isfinite(diff)) return best;
      next[i] = (col == 1 ? 0.0 : prev[i + 1]) + 1.0 / diff;
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (col % 2 == 0) {
      if (!std::isfinite(cur.back())) return best;
      best = cur.back();
    }
  }
  return best;
}

}  // namespace detail

namespace detail {

template <class F>
QuadratureResult integrate_finite(F& f, double a, double b, const QuadratureSpec& spec) {
  if (a == b) return {};
  const double sign = b < a ? -1.0 : 1.0;
  if (b < a) std::swap(a, b);

  std::priority_queue<detail::KronrodSegment> heap;
  heap.push(detail::gauss_kronrod_21(f, a, b));
  double total = heap.top().value, err = heap.top().error;
  int evaluations = 21;
  for (int i = 1; i < spec.max_subdivisions; ++i) {
    if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) break;
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const auto left = detail::gauss_kronrod_21(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_21(f, mid, worst.b);
    evaluations += 42;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // re-sum to shed the drift of incremental updates
  total = 0.0;
  err = 0.0;
  for (auto h = heap; !h.empty(); h.pop()) {
    total += h.top().value;
    err += h.top().error;
  }
  if (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)) && err > 1e-13 * std::abs(total))
    throw ConvergenceError("integrate: tolerance not reached within max_subdivisions", sign * total, err);
  return {sign * total, err, evaluations};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on [a, b]; b may be +infinity.
template <class F>
QuadratureResult integrate(F f, double a, double b, const QuadratureSpec& spec = {}) {
  spec.validate();
  if (!std::isfinite(a) || std::isnan(b)) throw DomainError("integrate: limits must be finite (upper may be +inf)");
  if (std::isinf(b)) {
    if (b < 0.0) throw DomainError("integrate: upper limit must be > lower limit");
    // u = a + t / (1 - t), t in [0, 1)
    auto g = [&](double t) {
      if (t >= 1.0) return 0.0;
      const double one_minus = 1.0 - t;
      return f(a + t / one_minus) / (one_minus * one_minus);
    };
    return detail::integrate_finite(g, 0.0, 1.0, spec);
  }
  return detail::integrate_finite(f, a, b, spec);
}

/// Semi-infinite integral over [a, inf) evaluated cycle by cycle between the
/// breakpoints a < breakpoint(1) < breakpoint(2) < ... The partial sums are
/// extrapolated with Wynn's epsilon algorithm; iteration stops once two
/// successive extrapolated values agree within tolerance.
template <class F, class Breakpoint>
QuadratureResult integrate_oscillatory(F f, double a, Breakpoint breakpoint, const QuadratureSpec& spec = {}) {
  spec.validate();
  QuadratureSpec inner = spec;
  inner.rel_tol = 1e-13;
  inner.abs_tol = 0.1 * spec.abs_tol;

  constexpr std::size_t kWindow = 40;
  std::vector<double> partial;
  double sum = 0.0, left = a, last = 0.0, last_change = std::numeric_limits<double>::infinity();
  int agreements = 0, small_terms = 0, evaluations = 0;
  for (int k = 1; k <= spec.max_subdivisions; ++k) {
    const double right = breakpoint(k);
    if (!(right > left)) throw DomainError("integrate_oscillatory: breakpoints must increase");
    const auto piece = integrate(f, left, right, inner);
    evaluations += piece.evaluations;
    sum += piece.value;
    left = right;
    partial.push_back(sum);
    if (partial.size() > kWindow) partial.erase(partial.begin());

    const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(sum));
    small_terms = std::abs(piece.value) <= 0.1 * tol ? small_terms + 1 : 0;
    if (small_terms >= 4) return {sum, std::abs(piece.value), evaluations};

    if (spec.acceleration == Acceleration::none || k < 6) continue;
    const double estimate = detail::wynn_epsilon(partial);
    const double change = std::abs(estimate - last);
    agreements = change <= tol ? agreements + 1 : 0;
    if (agreements >= 2) return {estimate, std::max(change, last_change), evaluations};
    last = estimate;
    last_change = change;
  }
  throw ConvergenceError("integrate_oscillatory: sequence did not settle", last, last_change);
}

}  // namespace pinstat
