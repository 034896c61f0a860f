#pragma once

// von Mises distribution and the two von Mises approximations to PIN(gamma):
//   Approx 1 (moment matching):  A(kappa) = rho(gamma)
//   Approx 2 (score matching):   kappa = gamma sqrt(2 pi gamma) {I_0 + I_1}(gamma) / sinh(gamma)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pinstat/error.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/rng.hpp"
#include "pinstat/special.hpp"

namespace pinstat {

struct VonMisesParams {
  double mu = 0.0;
  double kappa = 0.0;

  VonMisesParams() = default;
  VonMisesParams(double mean_direction, double concentration)
      : mu(normalize_angle(mean_direction)), kappa(concentration) {
    if (!(concentration >= 0.0) || !std::isfinite(concentration))
      throw DomainError("VonMisesParams: kappa must be finite and >= 0");
  }
};

inline double vm_log_pdf(double theta, const VonMisesParams& params) {
  // exp{kappa cos} / (2 pi I0(kappa)) with I0 scaled by exp(-kappa)
  return params.kappa * (std::cos(theta - params.mu) - 1.0) - std::log(2.0 * std::numbers::pi * bessel_i0e(params.kappa));
}

inline double vm_pdf(double theta, const VonMisesParams& params) { return std::exp(vm_log_pdf(theta, params)); }

inline double approx1_kappa(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("approx1_kappa: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  const double rho = pin_rho(gamma);
  if (rho >= 1.0) return 4.0 * gamma;
  return inv_A(rho);
}

inline double approx2_kappa(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("approx2_kappa: gamma must be >= 0");
  if (gamma == 0.0) return 0.0;
  // e^{-gamma} sinh(gamma) = (1 - e^{-2 gamma}) / 2
  const double scaled_sinh = -0.5 * std::expm1(-2.0 * gamma);
  return gamma * std::sqrt(2.0 * std::numbers::pi * gamma) * (bessel_i0e(gamma) + bessel_i1e(gamma)) / scaled_sinh;
}

/// KL(PIN(0, gamma) || vM(0, kappa)) by adaptive quadrature over (-pi, pi].
inline double kl_pin_vm(double gamma, double kappa, const QuadratureSpec& spec = {1e-11, 1e-10, 2000}) {
  if (!(gamma > 0.0)) throw DomainError("kl_pin_vm: gamma must be > 0");
  const PinParams pin(0.0, gamma);
  const VonMisesParams vm(0.0, kappa);
  auto integrand = [&](double theta) {
    const double lf = pin_log_pdf(theta, pin);
    return std::exp(lf) * (lf - vm_log_pdf(theta, vm));
  };
  // symmetric about 0
  return 2.0 * integrate(integrand, 0.0, std::numbers::pi, spec).value;
}

/// von Mises variates by the Best-Fisher rejection sampler.
inline std::vector<double> vm_sample(std::size_t n, const VonMisesParams& params, RandomStream& rng) {
  std::vector<double> out(n);
  if (params.kappa < 1e-8) {
    for (auto& t : out) t = normalize_angle(2.0 * std::numbers::pi * rng.uniform() - std::numbers::pi);
    return out;
  }
  const double k = params.kappa;
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * k * k);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * k);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (auto& t : out) {
    double f;
    for (;;) {
      const double z = std::cos(std::numbers::pi * rng.uniform());
      f = (1.0 + r * z) / (r + z);
      const double c = k * (r - f);
      const double u2 = rng.uniform_open_zero();
      if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    t = normalize_angle(params.mu + sign * std::acos(std::clamp(f, -1.0, 1.0)));
  }
  return out;
}

inline std::vector<double> vm_sample(std::size_t n, const VonMisesParams& params, std::uint64_t seed) {
  RandomStream rng(seed);
  return vm_sample(n, params, rng);
}

}  // namespace pinstat
