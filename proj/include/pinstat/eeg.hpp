#pragma once

// EEG phase-synchrony pipeline: trace -> segments -> FFT -> per-bin phases -> CSM spectrum.
//
// DFT convention: Y_j = sum_{t=0}^{L-1} x_t exp(-i 2 pi j t / L), no normalisation.
// Starting the sum at t = 1 instead rotates every segment's phase at bin j by the
// same angle, so the CSM is unaffected.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pinstat/error.hpp"
#include "pinstat/estimate.hpp"
#include "pinstat/infer.hpp"
#include "pinstat/pin.hpp"
#include "pinstat/rng.hpp"

namespace pinstat {

struct TimeSeries {
  double sample_rate_hz = 1.0;
  std::vector<double> samples;
  std::string label;

  double duration_s() const { return samples.size() / sample_rate_hz; }
};

struct SegmentSet {
  std::vector<std::vector<double>> segments;
  std::size_t segment_len = 0;
  double sample_rate_hz = 1.0;
  std::vector<std::string> warnings;

  std::size_t n() const { return segments.size(); }
};

struct CsmSpectrum {
  std::vector<double> freqs_hz;
  std::vector<double> csm;
  std::size_t n = 0;
  double crit_alpha = 0.05;
  double crit_value = 0.0;
};

struct LoadOptions {
  bool has_header = false;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

inline double parse_number(const std::string& field, std::size_t line) {
  const std::string f = trim(field);
  if (f.empty()) throw ParseError("empty field", line);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(f, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + f + "'", line);
  }
  if (used != f.size() || !std::isfinite(v)) throw ParseError("not a finite number: '" + f + "'", line);
  return v;
}

inline bool is_power_of_two(std::size_t v) { return v && !(v & (v - 1)); }

}  // namespace detail

/// Parses a trace from CSV text: one column (voltage) or two columns (time_s, voltage).
/// Two-column input must be uniformly spaced at 1/sample_rate_hz within 1e-9 relative.
/// Blank lines and lines starting with '#' are skipped; the header is the first other line.
inline TimeSeries parse_trace(std::istream& in, double sample_rate_hz, const LoadOptions& opt = {},
                              const std::string& label = "") {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) throw DomainError("load_trace: sample rate must be > 0");
  TimeSeries ts;
  ts.sample_rate_hz = sample_rate_hz;
  ts.label = label;
  std::vector<double> times;
  std::string line;
  std::size_t line_no = 0;
  int columns = 0;
  bool header_pending = opt.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body[0] == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() < 1 || fields.size() > 2) throw ParseError("expected 1 or 2 columns", line_no);
    if (columns == 0) columns = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != columns) throw ParseError("inconsistent column count", line_no);
    if (columns == 2) {
      const double t = detail::parse_number(fields[0], line_no);
      if (!times.empty()) {
        const double step = t - times.back();
        const double expected = 1.0 / sample_rate_hz;
        if (std::abs(step - expected) > 1e-9 * expected * std::max(1.0, std::abs(t) * sample_rate_hz))
          throw ParseError("time stamps not uniformly spaced at 1/" + std::to_string(sample_rate_hz) + " s", line_no);
      }
      times.push_back(t);
    }
    ts.samples.push_back(detail::parse_number(fields.back(), line_no));
  }
  if (ts.samples.empty()) throw ParseError("no samples in input", 0);
  return ts;
}

inline TimeSeries load_trace(const std::string& path, double sample_rate_hz, const LoadOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw DomainError("load_trace: cannot open '" + path + "'");
  return parse_trace(in, sample_rate_hz, opt, path);
}

/// Consecutive non-overlapping blocks of segment_seconds; the remainder is dropped with a warning.
inline SegmentSet segment(const TimeSeries& trace, double segment_seconds) {
  if (!(segment_seconds > 0.0)) throw DomainError("segment: segment length must be > 0");
  const double exact = segment_seconds * trace.sample_rate_hz;
  const auto len = static_cast<std::size_t>(std::llround(exact));
  if (std::abs(exact - static_cast<double>(len)) > 1e-9 * std::max(1.0, exact) || !detail::is_power_of_two(len))
    throw DomainError("segment: segment length " + std::to_string(exact) + " samples is not a power of two");
  const std::size_t count = trace.samples.size() / len;
  if (count < 2) throw DomainError("segment: fewer than 2 complete segments");
  SegmentSet out;
  out.segment_len = len;
  out.sample_rate_hz = trace.sample_rate_hz;
  for (std::size_t k = 0; k < count; ++k)
    out.segments.emplace_back(trace.samples.begin() + k * len, trace.samples.begin() + (k + 1) * len);
  const std::size_t rest = trace.samples.size() - count * len;
  if (rest)
    out.warnings.push_back("dropped trailing " + std::to_string(rest) + " samples (" +
                           std::to_string(rest / trace.sample_rate_hz) + " s)");
  return out;
}

/// In-place iterative radix-2 FFT, forward sign exp(-i 2 pi j t / L).
inline void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (!detail::is_power_of_two(n)) throw DomainError("fft: length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // twiddles computed directly rather than by recurrence to keep errors flat
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const std::complex<double> w(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

inline std::vector<std::complex<double>> fft(const std::vector<double>& x) {
  std::vector<std::complex<double>> a(x.begin(), x.end());
  fft(a);
  return a;
}

/// Integer bin for freq_hz; non-integer bins are an error naming the neighbouring frequencies.
inline std::size_t frequency_bin(const SegmentSet& segments, double freq_hz) {
  const double resolution = segments.sample_rate_hz / segments.segment_len;
  const double j = freq_hz / resolution;
  const double nearest = std::round(j);
  if (std::abs(j - nearest) > 1e-9 * std::max(1.0, j)) {
    std::ostringstream msg;
    msg << "frequency " << freq_hz << " Hz is not on the DFT grid (resolution " << resolution << " Hz); nearest are "
        << std::floor(j) * resolution << " and " << std::ceil(j) * resolution << " Hz";
    throw DomainError(msg.str());
  }
  if (nearest < 0.0 || nearest > segments.segment_len / 2.0) throw DomainError("frequency outside [0, Nyquist]");
  return static_cast<std::size_t>(nearest);
}

namespace detail {
inline std::vector<std::vector<std::complex<double>>> segment_spectra(const SegmentSet& segments) {
  std::vector<std::vector<std::complex<double>>> out;
  out.reserve(segments.n());
  for (const auto& s : segments.segments) out.push_back(fft(s));
  return out;
}
}  // namespace detail

inline AngleSample segment_phases(const SegmentSet& segments, double freq_hz) {
  const std::size_t j = frequency_bin(segments, freq_hz);
  std::vector<double> phases;
  phases.reserve(segments.n());
  for (const auto& s : segments.segments) {
    const auto y = fft(s);
    phases.push_back(std::atan2(y[j].imag(), y[j].real()));
  }
  return AngleSample(std::move(phases));
}

/// CSM at every integer bin 1..floor(max_freq_hz / resolution).
inline CsmSpectrum csm_spectrum(const SegmentSet& segments, double max_freq_hz, double alpha = 0.05) {
  check_alpha(alpha);
  const double nyquist = 0.5 * segments.sample_rate_hz;
  if (max_freq_hz > nyquist * (1.0 + 1e-12)) throw DomainError("csm_spectrum: max frequency above Nyquist");
  const double resolution = segments.sample_rate_hz / segments.segment_len;
  const auto top = static_cast<std::size_t>(std::floor(max_freq_hz / resolution + 1e-9));
  const auto spectra = detail::segment_spectra(segments);
  CsmSpectrum out;
  out.n = segments.n();
  out.crit_alpha = alpha;
  out.crit_value = std::log(1.0 / alpha) / out.n;
  for (std::size_t j = 1; j <= top; ++j) {
    double c = 0.0, s = 0.0;
    for (const auto& y : spectra) {
      const double theta = std::atan2(y[j].imag(), y[j].real());
      c += std::cos(theta);
      s += std::sin(theta);
    }
    c /= out.n;
    s /= out.n;
    out.freqs_hz.push_back(j * resolution);
    out.csm.push_back(std::min(1.0, c * c + s * s));
  }
  return out;
}

struct HarmonicRow {
  double freq_hz = 0.0;
  double csm = 0.0;
  bool above_crit = false;
  double mu_hat = 0.0;
  double gamma_hat = 0.0;
  ConfidenceInterval csm_ci;
  std::vector<std::string> warnings;
};

/// Per harmonic: CSM, hybrid gamma_hat and the kappa -> gamma -> CSM interval (exact gamma mapping).
inline std::vector<HarmonicRow> harmonic_report(const SegmentSet& segments, const std::vector<double>& harmonics_hz,
                                                double alpha = 0.05) {
  check_alpha(alpha);
  std::vector<HarmonicRow> rows;
  const double crit = std::log(1.0 / alpha) / segments.n();
  for (double f : harmonics_hz) {
    const auto phases = segment_phases(segments, f);
    const auto summary = circ_summary(phases);
    HarmonicRow row;
    row.freq_hz = f;
    row.csm = summary.csm;
    row.above_crit = summary.csm >= crit;
    const auto fit = pin_mle(phases, MleMode::hybrid);
    row.mu_hat = fit.mu_hat;
    row.gamma_hat = fit.gamma_hat;
    if (fit.diagnostics.degenerate) row.warnings.push_back(fit.diagnostics.note);
    if (summary.R_bar < 1.0) {
      row.csm_ci = sample_csm_ci(summary, alpha, GammaIntervalMode::exact);
      for (const auto& w : row.csm_ci.warnings) row.warnings.push_back(w);
    } else {
      row.csm_ci = {1.0, 1.0, 1.0 - alpha, IntervalTarget::csm, {"Rbar = 1: interval degenerate"}};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Synthetic impulse-train EEG
// ---------------------------------------------------------------------------

struct ImpulseTrainSpec {
  double period_s = 1.0 / 6.0;
  double amplitude = 1.0;
  double duration_s = 24.0;
  double noise_mean = 0.0;
  double noise_sd = 1.0;
  double sample_rate_hz = 256.0;

  void validate() const {
    if (!(period_s > 0.0) || !(duration_s > 0.0) || !(sample_rate_hz > 0.0))
      throw DomainError("ImpulseTrainSpec: period, duration and sample rate must be > 0");
    if (!(noise_sd >= 0.0) || !std::isfinite(amplitude) || !std::isfinite(noise_mean))
      throw DomainError("ImpulseTrainSpec: noise_sd must be >= 0 and amplitude/mean finite");
  }
};

/// Deterministic part: amplitude at the sample nearest each t = kT.
inline std::vector<double> impulse_train(const ImpulseTrainSpec& spec) {
  spec.validate();
  const auto count = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
  std::vector<double> x(count, 0.0);
  for (std::size_t k = 0;; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(k * spec.period_s * spec.sample_rate_hz));
    if (idx >= count) break;
    x[idx] += spec.amplitude;
  }
  return x;
}

/// Impulse train plus i.i.d. N(noise_mean, noise_sd^2) samples.
inline TimeSeries synth_impulse_eeg(const ImpulseTrainSpec& spec, std::uint64_t seed) {
  TimeSeries ts;
  ts.sample_rate_hz = spec.sample_rate_hz;
  ts.samples = impulse_train(spec);
  ts.label = "synthetic impulse train";
  RandomStream rng(seed);
  for (double& v : ts.samples) v += spec.noise_mean + spec.noise_sd * rng.normal();
  return ts;
}

/// gamma of the PIN phase law at bin j of one segment whose deterministic part is
/// `clean`: |Y_j|^2 / (4 s^2) with s^2 = noise_sd^2 L / 2 the variance of Re Y_j and Im Y_j.
inline double expected_bin_gamma(const std::vector<double>& clean, std::size_t bin, double noise_sd) {
  if (!(noise_sd > 0.0)) throw DomainError("expected_bin_gamma: noise_sd must be > 0");
  const auto y = fft(clean);
  if (bin == 0 || bin >= clean.size() / 2) throw DomainError("expected_bin_gamma: bin must lie strictly inside (0, L/2)");
  const double s2 = noise_sd * noise_sd * clean.size() / 2.0;
  return std::norm(y[bin]) / (4.0 * s2);
}

}  // namespace pinstat
