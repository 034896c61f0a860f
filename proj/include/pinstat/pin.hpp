#pragma once

// The projected isotropic normal (PIN) distribution of a phase angle.
//
// If (x, y) ~ N((beta cos mu, beta sin mu), sigma^2 I) then theta = atan2(y, x)
// is PIN(mu, gamma) with gamma = beta^2 / (4 sigma^2). Writing d = 2 sqrt(gamma),
//
//   f(theta) = exp(-2 gamma) / (2 pi) + d c Phi(d c) phi(d s),
//   c = cos(theta - mu), s = sin(theta - mu),
//
// which factors as phi(d s) [phi(d c) + d c Phi(d c)]; the factored form is what
// is evaluated so that the density stays positive for large gamma.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "pinstat/error.hpp"
#include "pinstat/rng.hpp"
#include "pinstat/special.hpp"

namespace pinstat {

/// Map any finite angle into (-pi, pi].
inline double normalize_angle(double theta) {
  double r = std::remainder(theta, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  return r;
}

struct PinParams {
  double mu = 0.0;
  double gamma = 0.0;

  PinParams() = default;
  PinParams(double mean_direction, double concentration) : mu(normalize_angle(mean_direction)), gamma(concentration) {
    if (!std::isfinite(mean_direction)) throw DomainError("PinParams: mu must be finite");
    if (!(concentration >= 0.0) || !std::isfinite(concentration))
      throw DomainError("PinParams: gamma must be finite and >= 0");
  }

  /// Signal-to-noise ratio at the bin, SNR = 2 gamma.
  double snr() const { return 2.0 * gamma; }
  static PinParams from_snr(double mu, double snr) { return {mu, 0.5 * snr}; }
};

/// Observed phases, normalised into (-pi, pi]. Never empty.
class AngleSample {
 public:
  explicit AngleSample(std::vector<double> angles) : angles_(std::move(angles)) {
    if (angles_.empty()) throw DomainError("AngleSample: sample must contain at least one angle");
    for (double& a : angles_) {
      if (!std::isfinite(a)) throw DomainError("AngleSample: angles must be finite");
      a = normalize_angle(a);
    }
  }

  static AngleSample from_degrees(std::span<const double> degrees) {
    std::vector<double> radians(degrees.begin(), degrees.end());
    for (double& a : radians) a *= std::numbers::pi / 180.0;
    return AngleSample(std::move(radians));
  }

  std::span<const double> angles() const { return angles_; }
  std::size_t size() const { return angles_.size(); }
  double operator[](std::size_t i) const { return angles_[i]; }
  auto begin() const { return angles_.begin(); }
  auto end() const { return angles_.end(); }

 private:
  std::vector<double> angles_;
};

inline double pin_log_pdf(double theta, const PinParams& params) {
  if (params.gamma == 0.0) return -std::log(2.0 * std::numbers::pi);
  const double d = 2.0 * std::sqrt(params.gamma);
  const double delta = theta - params.mu;
  const double s = d * std::sin(delta);
  return -0.5 * s * s - 0.5 * std::log(2.0 * std::numbers::pi) + log_phi_plus_x_Phi(d * std::cos(delta));
}

inline double pin_pdf(double theta, const PinParams& params) {
  if (params.gamma == 0.0) return 0.5 / std::numbers::pi;
  return std::exp(pin_log_pdf(theta, params));
}

/// E(cos p theta) for PIN(0, gamma):
/// sqrt(pi gamma / 2) e^{-gamma} {I_{(p-1)/2}(gamma) + I_{(p+1)/2}(gamma)}.
inline double pin_cos_moment(int p, double gamma) {
  if (p < 1) throw DomainError("pin_cos_moment: p must be >= 1");
  if (!(gamma >= 0.0)) throw DomainError("pin_cos_moment: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  const double lo = bessel_i(0.5 * (p - 1), gamma, true);
  const double hi = bessel_i(0.5 * (p + 1), gamma, true);
  return std::sqrt(0.5 * std::numbers::pi * gamma) * (lo + hi);
}

/// Population mean resultant length rho(gamma) = E(cos theta).
inline double pin_rho(double gamma) { return pin_cos_moment(1, gamma); }

/// Draws n angles: x ~ N(2 sqrt(gamma), 1), y ~ N(0, 1), theta = atan2(y, x) + mu.
inline AngleSample pin_sample(std::size_t n, const PinParams& params, RandomStream& rng) {
  if (n < 1) throw DomainError("pin_sample: n must be >= 1");
  const double shift = 2.0 * std::sqrt(params.gamma);
  std::vector<double> out(n);
  for (auto& theta : out) {
    const double x = shift + rng.normal();
    const double y = rng.normal();
    theta = std::atan2(y, x) + params.mu;
  }
  return AngleSample(std::move(out));
}

inline AngleSample pin_sample(std::size_t n, const PinParams& params, std::uint64_t seed) {
  RandomStream rng(seed);
  return pin_sample(n, params, rng);
}

struct ModeAntimode {
  double mode_pdf;
  double antimode_pdf;
};

/// Density at the mode theta = mu and at the antimode theta = mu + pi:
///   e^{-2g}/(2 pi) + sqrt(2g/pi) Phi(2 sqrt g)  and  e^{-2g}/(2 pi) - sqrt(2g/pi) Phi(-2 sqrt g).
inline ModeAntimode pin_mode_antimode(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("pin_mode_antimode: gamma must be >= 0");
  const double d = 2.0 * std::sqrt(gamma);
  const double base = normal_pdf(0.0);
  // both values are phi(0) * [phi(+-d) +- d Phi(+-d)]
  return {base * std::exp(log_phi_plus_x_Phi(d)), base * std::exp(log_phi_plus_x_Phi(-d))};
}

}  // namespace pinstat
