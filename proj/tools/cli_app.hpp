#pragma once

// The pinstat command-line front end. run_cli() is kept separate from main()
// so tests can drive it with in-memory streams.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pinstat.hpp"

namespace pinstat::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNonConvergence = 2 };

using Cell = std::variant<double, long long, std::string, bool>;

struct Column {
  std::string csv;
  std::string json;
};

/// A command's result: metadata plus one rectangular table.
struct Table {
  std::string rows_key = "rows";
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> meta;
  std::vector<std::string> warnings;

  void add_columns(std::initializer_list<std::string> names) {
    for (const auto& n : names) columns.push_back({n, n});
  }
};

struct OutputOptions {
  std::string format = "csv";
  std::string path;
  int precision = 10;
};

inline std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string cell_text(const Cell& c, int precision) {
  struct V {
    int p;
    std::string operator()(double v) const { return format_double(v, p); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(V{precision}, c);
}

inline nlohmann::json cell_json(const Cell& c, int precision) {
  struct V {
    int p;
    nlohmann::json operator()(double v) const {
      // same rounding as the CSV text; non-finite values become strings
      if (!std::isfinite(v)) return format_double(v, p);
      return std::stod(format_double(v, p));
    }
    nlohmann::json operator()(long long v) const { return v; }
    nlohmann::json operator()(const std::string& v) const { return v; }
    nlohmann::json operator()(bool v) const { return v; }
  };
  return std::visit(V{precision}, c);
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline void write_table(const Table& t, const OutputOptions& o, std::ostream& out) {
  if (o.format == "json") {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : t.meta) j[k] = cell_json(v, o.precision);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
      nlohmann::ordered_json row;
      for (std::size_t i = 0; i < t.columns.size(); ++i) row[t.columns[i].json] = cell_json(r[i], o.precision);
      rows.push_back(std::move(row));
    }
    j[t.rows_key] = std::move(rows);
    if (!t.warnings.empty()) j["warnings"] = t.warnings;
    out << j.dump(2) << '\n';
    return;
  }
  for (const auto& [k, v] : t.meta) out << "# " << k << " = " << cell_text(v, o.precision) << '\n';
  for (const auto& w : t.warnings) out << "# warning: " << w << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i].csv;
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(r[i], o.precision));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Input helpers
// ---------------------------------------------------------------------------

inline AngleSample read_angles(const std::string& source, bool degrees, std::istream& stdin_stream) {
  std::ifstream file;
  std::istream* in = &stdin_stream;
  if (source != "-") {
    file.open(source);
    if (!file) throw DomainError("cannot open angle file '" + source + "'");
    in = &file;
  }
  auto is_number = [](const std::string& tok) {
    char* end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end != tok.c_str() && *end == '\0';
  };
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::optional<std::size_t> column;  // set by a header such as "index,theta"
  while (std::getline(*in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',' || ch == ';') ch = ' ';
    std::istringstream ss(line);
    std::vector<std::string> toks;
    for (std::string tok; ss >> tok;) toks.push_back(tok);
    if (toks.empty()) continue;
    if (first && std::none_of(toks.begin(), toks.end(), is_number)) {
      first = false;
      for (std::size_t i = 0; i < toks.size(); ++i)
        if (toks[i] == "theta" || toks[i] == "angle" || toks[i] == "phase") column = i;
      continue;
    }
    first = false;
    if (column) {
      if (*column >= toks.size()) throw ParseError("missing angle column", line_no);
      values.push_back(detail::parse_number(toks[*column], line_no));
    } else {
      for (const auto& tok : toks) values.push_back(detail::parse_number(tok, line_no));
    }
  }
  if (values.empty()) throw ParseError("no angles read from '" + source + "'", 0);
  if (degrees) return AngleSample::from_degrees(values);
  return AngleSample(std::move(values));
}

inline ResultantModel resultant_model(std::optional<double> kappa, std::optional<double> gamma) {
  if (kappa && gamma) throw DomainError("give at most one of --kappa and --gamma");
  if (kappa) return ResultantModel::von_mises(*kappa);
  if (gamma) return ResultantModel::pin_approx1(*gamma);
  return ResultantModel::uniform();
}

inline std::vector<double> open_grid(double lo, double hi, int points) {
  if (points < 1) throw DomainError("--points must be >= 1");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * (i + 0.5) / points;
  return g;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct DensityArgs {
  std::string dist = "pin";
  double mu = 0.0;
  std::optional<double> gamma, kappa;
  double lambda = 0.0;
  int n = 10;
  int points = 181;
};

inline Table cmd_density(const DensityArgs& a) {
  Table t;
  t.meta = {{"dist", a.dist}};
  auto need_gamma = [&] {
    if (!a.gamma) throw DomainError("--gamma is required for --dist " + a.dist);
    return *a.gamma;
  };
  if (a.dist == "pin" || a.dist == "vm" || a.dist == "approx1" || a.dist == "approx2") {
    std::function<double(double)> pdf;
    if (a.dist == "pin") {
      const PinParams p(a.mu, need_gamma());
      pdf = [p](double th) { return pin_pdf(th, p); };
      t.meta.push_back({"gamma", p.gamma});
    } else {
      double kappa;
      if (a.dist == "vm") {
        if (!a.kappa) throw DomainError("--kappa is required for --dist vm");
        kappa = *a.kappa;
      } else {
        kappa = a.dist == "approx1" ? approx1_kappa(need_gamma()) : approx2_kappa(need_gamma());
      }
      const VonMisesParams p(a.mu, kappa);
      pdf = [p](double th) { return vm_pdf(th, p); };
      t.meta.push_back({"kappa", kappa});
    }
    t.add_columns({"theta", "pdf"});
    if (a.points < 2) throw DomainError("--points must be >= 2");
    for (int i = 0; i < a.points; ++i) {
      const double th = -std::numbers::pi + 2.0 * std::numbers::pi * i / (a.points - 1);
      t.rows.push_back({th, pdf(th)});
    }
    return t;
  }
  if (a.dist == "resultant" || a.dist == "csm") {
    ResultantDensitySpec spec;
    spec.n = a.n;
    spec.model = resultant_model(a.kappa, a.gamma);
    spec.validate();
    t.meta.push_back({"n", static_cast<long long>(a.n)});
    t.meta.push_back({"kappa", spec.model.kappa()});
    if (a.dist == "resultant") {
      t.add_columns({"R", "pdf"});
      for (double r : open_grid(0.0, a.n, a.points)) t.rows.push_back({r, resultant_pdf(r, spec)});
    } else {
      t.add_columns({"v", "pdf"});
      for (double v : open_grid(0.0, 1.0, a.points)) t.rows.push_back({v, csm_pdf(v, spec)});
    }
    return t;
  }
  if (a.dist == "n2-cosine") {
    t.meta.push_back({"lambda", a.lambda});
    t.add_columns({"R", "pdf"});
    for (double r : open_grid(0.0, 2.0, a.points)) t.rows.push_back({r, n2_resultant_pdf_cosine(r, {a.lambda})});
    return t;
  }
  throw DomainError("unknown --dist '" + a.dist + "' (pin, vm, approx1, approx2, resultant, csm, n2-cosine)");
}

inline Table cmd_approx(const std::vector<double>& gammas, bool with_kl) {
  Table t;
  t.add_columns({"gamma", "kappa1", "kappa2"});
  if (with_kl) t.add_columns({"kl1", "kl2"});
  for (double g : gammas) {
    const double k1 = approx1_kappa(g), k2 = approx2_kappa(g);
    std::vector<Cell> row{g, k1, k2};
    if (with_kl) {
      row.push_back(g > 0 ? kl_pin_vm(g, k1) : 0.0);
      row.push_back(g > 0 ? kl_pin_vm(g, k2) : 0.0);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline const std::vector<double> kApproxTableGammas = {0.05, 0.25, 0.5, 0.75, 1.0, 2.0, 2.5, 3.75, 5.0};

struct SampleArgs {
  std::string dist = "pin";
  double mu = 0.0;
  std::optional<double> gamma, kappa;
  int n = 12;
  std::uint64_t seed = 1;
};

inline Table cmd_sample(const SampleArgs& a) {
  Table t;
  t.meta = {{"dist", a.dist}, {"n", static_cast<long long>(a.n)}, {"seed", static_cast<long long>(a.seed)}};
  if (a.n < 1) throw DomainError("--n must be >= 1");
  RandomStream rng(a.seed);
  std::vector<double> angles;
  if (a.dist == "pin") {
    if (!a.gamma) throw DomainError("--gamma is required for --dist pin");
    const auto s = pin_sample(a.n, PinParams(a.mu, *a.gamma), rng);
    angles.assign(s.begin(), s.end());
  } else if (a.dist == "vm") {
    if (!a.kappa) throw DomainError("--kappa is required for --dist vm");
    angles = vm_sample(a.n, VonMisesParams(a.mu, *a.kappa), rng);
  } else {
    throw DomainError("unknown --dist '" + a.dist + "' (pin, vm)");
  }
  t.add_columns({"index", "theta"});
  for (std::size_t i = 0; i < angles.size(); ++i) t.rows.push_back({static_cast<long long>(i), angles[i]});
  return t;
}

inline void add_summary_meta(Table& t, const CircularSummary& s, const std::string& prefix = "") {
  t.meta.push_back({prefix + "n", static_cast<long long>(s.n)});
  t.meta.push_back({prefix + "C_bar", s.C_bar});
  t.meta.push_back({prefix + "S_bar", s.S_bar});
  t.meta.push_back({prefix + "R_bar", s.R_bar});
  t.meta.push_back({prefix + "theta_bar", s.theta_bar});
  t.meta.push_back({prefix + "csm", s.csm});
}

inline Table cmd_estimate(const AngleSample& sample, const std::string& method) {
  Table t;
  const auto s = circ_summary(sample);
  add_summary_meta(t, s);
  t.add_columns({"method", "mu_hat", "gamma_hat", "loglik", "csm_hat"});
  const bool all = method == "all";
  bool any = false;
  auto emit = [&](const EstimationResult& r) {
    t.rows.push_back({std::string(to_string(r.method)), r.mu_hat, r.gamma_hat, r.loglik, csm_mle(r.gamma_hat)});
    if (r.diagnostics.degenerate) t.warnings.push_back(r.diagnostics.note);
    any = true;
  };
  if (all || method == "hybrid") emit(pin_mle(sample, MleMode::hybrid));
  if (all || method == "joint") emit(pin_mle(sample, MleMode::joint));
  auto mom = [&](EstimationMethod m) {
    if (s.R_bar >= 1.0) throw DomainError("moment estimators need Rbar < 1");
    EstimationResult r;
    r.method = m;
    r.mu_hat = s.theta_bar;
    r.gamma_hat = m == EstimationMethod::mom_approx1 ? mom_gamma_approx1(s.R_bar) : mom_gamma_approx2(s.R_bar);
    r.loglik = pin_loglik(sample, r.mu_hat, r.gamma_hat);
    emit(r);
  };
  if (all || method == "mom1") mom(EstimationMethod::mom_approx1);
  if (all || method == "mom2") mom(EstimationMethod::mom_approx2);
  if (!any) throw DomainError("unknown --method '" + method + "' (hybrid, joint, mom1, mom2, all)");
  return t;
}

inline std::vector<Cell> test_row(const TestResult& r) {
  return {std::string(to_string(r.method)),
          r.statistic,
          r.critical_value,
          r.p_value ? Cell{*r.p_value} : Cell{std::string("")},
          r.alpha,
          r.reject,
          r.df1,
          r.df2};
}

struct TestArgs {
  std::string angles, angles2;
  bool degrees = false;
  double alpha = 0.05;
  std::string flavor = "all";
  std::string null = "identical";
};

inline Table cmd_test(const TestArgs& a, std::istream& in) {
  Table t;
  t.add_columns({"method", "statistic", "critical_value", "p_value", "alpha", "reject", "df1", "df2"});
  const auto s1 = read_angles(a.angles, a.degrees, in);
  const auto sum1 = circ_summary(s1);
  if (a.angles2.empty()) {
    add_summary_meta(t, sum1);
    auto rayleigh = [&](RayleighFlavor f) { t.rows.push_back(test_row(rayleigh_test(sum1, a.alpha, f))); };
    if (a.flavor == "all" || a.flavor == "chi2") rayleigh(RayleighFlavor::chi2);
    if (a.flavor == "all" || a.flavor == "normal") rayleigh(RayleighFlavor::normal);
    if (a.flavor == "stephens") rayleigh(RayleighFlavor::stephens_exact_table);
    if (a.flavor == "all") {
      try {
        rayleigh(RayleighFlavor::stephens_exact_table);
      } catch (const UnsupportedError& e) {
        t.warnings.push_back(e.what());
      }
    }
    if (a.flavor == "all" || a.flavor == "lrt") t.rows.push_back(test_row(lrt_uniformity(s1, a.alpha)));
    if (t.rows.empty() && t.warnings.empty())
      throw DomainError("unknown --flavor '" + a.flavor + "' (chi2, normal, stephens, lrt, all)");
    return t;
  }
  const auto s2 = read_angles(a.angles2, a.degrees, in);
  const auto sum2 = circ_summary(s2);
  add_summary_meta(t, sum1, "sample1_");
  add_summary_meta(t, sum2, "sample2_");
  TwoSampleNull null;
  if (a.null == "identical") null = TwoSampleNull::identical;
  else if (a.null == "common-gamma") null = TwoSampleNull::common_gamma;
  else throw DomainError("unknown --null '" + a.null + "' (identical, common-gamma)");
  const auto lrt = two_sample_lrt(s1, s2, a.alpha, null);
  t.rows.push_back(test_row(lrt));
  for (const auto& n : lrt.notes) t.warnings.push_back(n);
  // the F ratio is oriented so that sample 1 is the more concentrated one
  const bool swap = sum2.R_bar > sum1.R_bar;
  t.rows.push_back(test_row(swap ? two_sample_F(sum2, sum1, a.alpha) : two_sample_F(sum1, sum2, a.alpha)));
  if (swap) t.warnings.push_back("F statistic uses sample 2 as the more concentrated sample");
  return t;
}

struct CiArgs {
  std::string angles;
  bool degrees = false;
  std::optional<double> resultant;
  std::optional<int> n;
  double alpha = 0.05;
  std::string gamma_mode = "exact";
};

inline Table cmd_ci(const CiArgs& a, std::istream& in) {
  Table t;
  double resultant;
  int n;
  if (!a.angles.empty()) {
    const auto s = read_angles(a.angles, a.degrees, in);
    const auto sum = circ_summary(s);
    add_summary_meta(t, sum);
    n = static_cast<int>(sum.n);
    resultant = n * sum.R_bar;
  } else {
    if (!a.resultant || !a.n) throw DomainError("give --angles, or both --resultant and --n");
    resultant = *a.resultant;
    n = *a.n;
  }
  GammaIntervalMode mode;
  if (a.gamma_mode == "exact") mode = GammaIntervalMode::exact;
  else if (a.gamma_mode == "divide4") mode = GammaIntervalMode::divide_by_4;
  else throw DomainError("unknown --gamma-mode '" + a.gamma_mode + "' (exact, divide4)");
  const auto k = kappa_ci(resultant, n, a.alpha);
  const auto g = gamma_ci(k, mode);
  const auto c = csm_ci(g);
  t.add_columns({"target", "lower", "upper", "level"});
  for (const auto* ci : {&k, &g, &c}) t.rows.push_back({std::string(to_string(ci->target)), ci->lower, ci->upper, ci->level});
  t.warnings = k.warnings;
  return t;
}

struct TraceArgs {
  std::string input;
  double fs = 256.0;
  double segment_seconds = 2.0;
  double alpha = 0.05;
  bool header = false;
  std::optional<double> max_freq;
  std::vector<double> harmonics;
};

inline SegmentSet load_segments(const TraceArgs& a, std::istream& in) {
  LoadOptions opt;
  opt.has_header = a.header;
  const auto trace = a.input == "-" ? parse_trace(in, a.fs, opt, "stdin") : load_trace(a.input, a.fs, opt);
  return segment(trace, a.segment_seconds);
}

inline Table cmd_spectrum(const TraceArgs& a, std::istream& in) {
  const auto seg = load_segments(a, in);
  const auto spec = csm_spectrum(seg, a.max_freq.value_or(0.5 * a.fs), a.alpha);
  Table t;
  t.rows_key = "bins";
  t.meta = {{"n", static_cast<long long>(spec.n)}, {"alpha", spec.crit_alpha}, {"crit", spec.crit_value}};
  t.columns = {{"freq_hz", "f"}, {"csm", "csm"}};
  for (std::size_t i = 0; i < spec.csm.size(); ++i) t.rows.push_back({spec.freqs_hz[i], spec.csm[i]});
  t.warnings = seg.warnings;
  return t;
}

inline Table cmd_report(const TraceArgs& a, std::istream& in) {
  const auto seg = load_segments(a, in);
  if (a.harmonics.empty()) throw DomainError("--harmonics is required");
  const auto rows = harmonic_report(seg, a.harmonics, a.alpha);
  Table t;
  t.rows_key = "harmonics";
  t.meta = {{"n", static_cast<long long>(seg.n())}, {"alpha", a.alpha}, {"crit", std::log(1.0 / a.alpha) / seg.n()}};
  t.add_columns({"freq_hz", "csm", "above_crit", "mu_hat", "gamma_hat", "csm_ci_lower", "csm_ci_upper"});
  for (const auto& r : rows) {
    t.rows.push_back({r.freq_hz, r.csm, r.above_crit, r.mu_hat, r.gamma_hat, r.csm_ci.lower, r.csm_ci.upper});
    for (const auto& w : r.warnings) t.warnings.push_back(format_double(r.freq_hz, 6) + " Hz: " + w);
  }
  t.warnings.insert(t.warnings.end(), seg.warnings.begin(), seg.warnings.end());
  return t;
}

inline Table cmd_synth(const ImpulseTrainSpec& spec, std::uint64_t seed) {
  const auto ts = synth_impulse_eeg(spec, seed);
  Table t;
  t.rows_key = "samples";
  t.meta = {{"sample_rate_hz", spec.sample_rate_hz}, {"seed", static_cast<long long>(seed)}};
  t.add_columns({"time_s", "voltage"});
  for (std::size_t i = 0; i < ts.samples.size(); ++i) t.rows.push_back({i / spec.sample_rate_hz, ts.samples[i]});
  return t;
}

struct MonteCarloArgs {
  double gamma = 0.0;
  int n = 10;
  long long reps = 100000;
  std::uint64_t seed = 1;
  bool ks = false;
  int cells = 200;
};

inline Table mc_summary_row_table() {
  Table t;
  t.add_columns({"gamma", "n", "reps", "kappa1", "mean_csm", "ks_distance", "ks_p_value"});
  return t;
}

inline std::vector<Cell> mc_summary_row(double gamma, int n, long long reps, std::uint64_t seed, int cells,
                                        unsigned threads) {
  const auto v = monte_carlo_csm(gamma, n, static_cast<std::size_t>(reps), seed, threads);
  ResultantDensitySpec spec;
  spec.n = n;
  spec.model = ResultantModel::pin_approx1(gamma);
  const ResultantCdf cdf(spec, cells, threads);
  const double d = ks_distance(v, [&](double x) { return cdf.csm(x); });
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  return {gamma, static_cast<long long>(n), reps, spec.model.kappa(), mean, d, ks_p_value(d, v.size())};
}

inline Table cmd_montecarlo(const MonteCarloArgs& a, unsigned threads) {
  if (a.reps < 1) throw DomainError("--reps must be >= 1");
  if (a.ks) {
    auto t = mc_summary_row_table();
    t.meta = {{"seed", static_cast<long long>(a.seed)}};
    t.rows.push_back(mc_summary_row(a.gamma, a.n, a.reps, a.seed, a.cells, threads));
    return t;
  }
  const auto v = monte_carlo_csm(a.gamma, a.n, static_cast<std::size_t>(a.reps), a.seed, threads);
  Table t;
  t.meta = {{"gamma", a.gamma}, {"n", static_cast<long long>(a.n)}, {"seed", static_cast<long long>(a.seed)}};
  t.add_columns({"replicate", "csm"});
  for (std::size_t i = 0; i < v.size(); ++i) t.rows.push_back({static_cast<long long>(i), v[i]});
  return t;
}

struct TablesArgs {
  std::string which = "approx";
  long long reps = 100000;
  int n = 10;
  std::uint64_t seed = 1;
  int points = 121;
  double gamma_max = 6.0;
};

inline Table cmd_tables(const TablesArgs& a, unsigned threads) {
  if (a.which == "approx") return cmd_approx(kApproxTableGammas, false);
  if (a.which == "csm-sim") {
    auto t = mc_summary_row_table();
    t.meta = {{"seed", static_cast<long long>(a.seed)}};
    for (double g : {0.0, 0.25, 0.5, 2.5}) t.rows.push_back(mc_summary_row(g, a.n, a.reps, a.seed, 200, threads));
    return t;
  }
  if (a.which == "loglik-scan") {
    // one seeded PIN(0, gamma) sample of size n per true gamma, profile over a grid
    Table t;
    t.meta = {{"n", static_cast<long long>(a.n)}, {"seed", static_cast<long long>(a.seed)}};
    t.add_columns({"true_gamma", "gamma", "loglik"});
    const double truths[] = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
    for (std::size_t k = 0; k < std::size(truths); ++k) {
      RandomStream rng(a.seed, k);
      const auto sample = pin_sample(a.n, PinParams(0.0, truths[k]), rng);
      const double mu = circ_summary(sample).theta_bar;
      for (int i = 0; i < a.points; ++i) {
        const double g = a.gamma_max * i / (a.points - 1);
        t.rows.push_back({truths[k], g, pin_loglik(sample, mu, g)});
      }
    }
    return t;
  }
  throw DomainError("unknown --which '" + a.which + "' (approx, csm-sim, loglik-scan)");
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, std::istream& in) {
  CLI::App app{"pinstat: projected isotropic normal phase statistics", "pinstat"};
  app.require_subcommand(1);
  app.fallthrough();
  OutputOptions output;
  int threads_opt = 0;
  app.add_option("--output", output.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output-path", output.path, "Write output to this file instead of stdout");
  app.add_option("--precision", output.precision, "Significant digits in numeric output")->check(CLI::Range(1, 17));
  app.add_option("--threads", threads_opt, "Worker threads (default: PINSTAT_THREADS or hardware)")->check(CLI::Range(1, 1024));

  std::function<Table(unsigned)> action;

  DensityArgs density;
  auto* c_density = app.add_subcommand("density", "Evaluate a density on a grid");
  c_density->add_option("--dist", density.dist, "pin, vm, approx1, approx2, resultant, csm, n2-cosine");
  c_density->add_option("--mu", density.mu, "Mean direction (radians)");
  c_density->add_option("--gamma", density.gamma, "PIN concentration");
  c_density->add_option("--kappa", density.kappa, "von Mises concentration");
  c_density->add_option("--lambda", density.lambda, "Cosine-model association parameter");
  c_density->add_option("--n", density.n, "Sample size for resultant/csm");
  c_density->add_option("--points", density.points, "Grid points");
  c_density->callback([&] { action = [&](unsigned) { return cmd_density(density); }; });

  std::vector<double> approx_gammas;
  bool approx_kl = false;
  auto* c_approx = app.add_subcommand("approx", "von Mises concentrations kappa1, kappa2 for PIN(gamma)");
  c_approx->add_option("--gamma", approx_gammas, "One or more gamma values")->required()->expected(1, -1);
  c_approx->add_flag("--kl", approx_kl, "Also report KL(PIN || vM) for both approximations");
  c_approx->callback([&] { action = [&](unsigned) { return cmd_approx(approx_gammas, approx_kl); }; });

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Draw seeded angles");
  c_sample->add_option("--dist", sample.dist, "pin or vm");
  c_sample->add_option("--mu", sample.mu, "Mean direction (radians)");
  c_sample->add_option("--gamma", sample.gamma, "PIN concentration");
  c_sample->add_option("--kappa", sample.kappa, "von Mises concentration");
  c_sample->add_option("--n", sample.n, "Number of angles");
  c_sample->add_option("--seed", sample.seed, "Random seed");
  c_sample->callback([&] { action = [&](unsigned) { return cmd_sample(sample); }; });

  std::string est_angles, est_method = "all";
  bool est_degrees = false;
  auto* c_estimate = app.add_subcommand("estimate", "Summary statistics and gamma estimates");
  c_estimate->add_option("--angles", est_angles, "Angle file, one value per line ('-' for stdin)")->required();
  c_estimate->add_flag("--degrees", est_degrees, "Angles are in degrees");
  c_estimate->add_option("--method", est_method, "hybrid, joint, mom1, mom2 or all");
  c_estimate->callback([&] {
    action = [&](unsigned) { return cmd_estimate(read_angles(est_angles, est_degrees, in), est_method); };
  });

  TestArgs test;
  auto* c_test = app.add_subcommand("test", "Uniformity tests, or two-sample tests with --angles2");
  c_test->add_option("--angles", test.angles, "Angle file ('-' for stdin)")->required();
  c_test->add_option("--angles2", test.angles2, "Second sample: run the two-sample LRT and F test");
  c_test->add_flag("--degrees", test.degrees, "Angles are in degrees");
  c_test->add_option("--alpha", test.alpha, "Significance level");
  c_test->add_option("--flavor", test.flavor, "chi2, normal, stephens, lrt or all");
  c_test->add_option("--null", test.null, "Two-sample null: identical or common-gamma");
  c_test->callback([&] { action = [&](unsigned) { return cmd_test(test, in); }; });

  CiArgs ci;
  auto* c_ci = app.add_subcommand("ci", "Confidence intervals for kappa, gamma and CSM");
  c_ci->add_option("--angles", ci.angles, "Angle file ('-' for stdin)");
  c_ci->add_flag("--degrees", ci.degrees, "Angles are in degrees");
  c_ci->add_option("--resultant", ci.resultant, "Resultant length R = n Rbar");
  c_ci->add_option("--n", ci.n, "Sample size");
  c_ci->add_option("--alpha", ci.alpha, "1 - confidence level");
  c_ci->add_option("--gamma-mode", ci.gamma_mode, "exact or divide4");
  c_ci->callback([&] { action = [&](unsigned) { return cmd_ci(ci, in); }; });

  TraceArgs trace;
  auto add_trace_options = [&](CLI::App* c) {
    c->add_option("--input", trace.input, "Trace CSV ('-' for stdin)")->required();
    c->add_option("--fs", trace.fs, "Sample rate (Hz)");
    c->add_option("--segment-seconds", trace.segment_seconds, "Segment length (s)");
    c->add_option("--alpha", trace.alpha, "Significance level of the critical line");
    c->add_flag("--header", trace.header, "First line of the CSV is a header");
  };
  auto* c_spectrum = app.add_subcommand("spectrum", "CSM spectrum of a trace");
  add_trace_options(c_spectrum);
  c_spectrum->add_option("--max-freq", trace.max_freq, "Highest frequency (Hz), default Nyquist");
  c_spectrum->callback([&] { action = [&](unsigned) { return cmd_spectrum(trace, in); }; });
  auto* c_report = app.add_subcommand("report", "Harmonic report: CSM, gamma_hat and CSM interval");
  add_trace_options(c_report);
  c_report->add_option("--harmonics", trace.harmonics, "Frequencies (Hz)")->expected(1, -1);
  c_report->callback([&] { action = [&](unsigned) { return cmd_report(trace, in); }; });

  ImpulseTrainSpec synth;
  std::uint64_t synth_seed = 1;
  auto* c_synth = app.add_subcommand("synth", "Synthetic impulse-train EEG trace");
  c_synth->add_option("--period", synth.period_s, "Impulse period T (s)");
  c_synth->add_option("--amplitude", synth.amplitude, "Impulse amplitude");
  c_synth->add_option("--duration", synth.duration_s, "Duration (s)");
  c_synth->add_option("--noise-mean", synth.noise_mean, "Noise mean");
  c_synth->add_option("--noise-sd", synth.noise_sd, "Noise standard deviation");
  c_synth->add_option("--fs", synth.sample_rate_hz, "Sample rate (Hz)");
  c_synth->add_option("--seed", synth_seed, "Random seed");
  c_synth->callback([&] { action = [&](unsigned) { return cmd_synth(synth, synth_seed); }; });

  MonteCarloArgs mc;
  auto* c_mc = app.add_subcommand("montecarlo", "Simulated CSM values of PIN samples");
  c_mc->add_option("--gamma", mc.gamma, "PIN concentration");
  c_mc->add_option("--n", mc.n, "Sample size");
  c_mc->add_option("--reps", mc.reps, "Replicates");
  c_mc->add_option("--seed", mc.seed, "Random seed");
  c_mc->add_flag("--ks", mc.ks, "Summarise: KS distance to the plug-in CSM density");
  c_mc->callback([&] { action = [&](unsigned th) { return cmd_montecarlo(mc, th); }; });

  TablesArgs tables;
  auto* c_tables = app.add_subcommand("tables", "Regenerate the kappa table, CSM simulation summaries, likelihood scans");
  c_tables->add_option("--which", tables.which, "approx, csm-sim or loglik-scan");
  c_tables->add_option("--reps", tables.reps, "Replicates for csm-sim");
  c_tables->add_option("--n", tables.n, "Sample size for csm-sim and loglik-scan");
  c_tables->add_option("--seed", tables.seed, "Random seed for csm-sim and loglik-scan");
  c_tables->add_option("--points", tables.points, "Grid points for loglik-scan");
  c_tables->callback([&] { action = [&](unsigned th) { return cmd_tables(tables, th); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  const unsigned threads = threads_opt > 0 ? static_cast<unsigned>(threads_opt) : default_thread_count();
  try {
    const Table table = action(threads);
    if (output.path.empty()) {
      write_table(table, output, out);
    } else {
      std::ofstream file(output.path, std::ios::binary);
      if (!file) throw DomainError("cannot write '" + output.path + "'");
      write_table(table, output, file);
    }
    return kOk;
  } catch (const ConvergenceError& e) {
    err << "numerical non-convergence: " << e.what() << " (estimate " << e.estimate() << ", error bound "
        << e.error_bound() << ")\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace pinstat::cli
