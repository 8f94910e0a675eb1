// Copyright 2026 The bellsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "bellsim/chain.hpp"
#include "bellsim/correlate.hpp"
#include "bellsim/detector.hpp"
#include "bellsim/report.hpp"
#include "bellsim/stats.hpp"

namespace bellsim::experiment {

using report::json;

inline constexpr int kReportSchemaVersion = 1;
/// Structured-vs-dense agreement tolerance for the oracle study.
inline constexpr double kOracleTol = 1e-12;

enum class Study { correlate, decohere_scan, chsh, nosignal, oracle_check };

inline std::string study_name(Study study) {
  switch (study) {
    case Study::correlate: return "correlate";
    case Study::decohere_scan: return "decohere-scan";
    case Study::chsh: return "chsh";
    case Study::nosignal: return "nosignal";
    case Study::oracle_check: return "oracle-check";
  }
  throw std::logic_error("study_name: unknown study");
}

inline Study parse_study(std::string_view name) {
  if (name == "correlate") return Study::correlate;
  if (name == "decohere-scan") return Study::decohere_scan;
  if (name == "chsh") return Study::chsh;
  if (name == "nosignal") return Study::nosignal;
  if (name == "oracle-check") return Study::oracle_check;
  throw std::invalid_argument("unknown study: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Flag-value parsing

/// Parses an angle token: a plain radian value ("0.4"), a pi multiple
/// ("pi", "2pi", "1.5pi"), or either over an integer-or-decimal
/// denominator ("pi/8", "3pi/8", "1/2").
inline double parse_angle(std::string_view token) {
  auto bad = [&] {
    return std::invalid_argument("cannot parse angle '" + std::string(token) + "'");
  };
  std::string_view rest = token;
  if (rest.empty()) throw bad();

  double sign = 1.0;
  if (rest.front() == '+' || rest.front() == '-') {
    if (rest.front() == '-') sign = -1.0;
    rest.remove_prefix(1);
  }

  auto parse_number = [&](std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw bad();
    return value;
  };

  double denominator = 1.0;
  if (auto slash = rest.find('/'); slash != std::string_view::npos) {
    std::string_view denom_text = rest.substr(slash + 1);
    if (denom_text.empty()) throw bad();
    denominator = parse_number(denom_text);
    if (denominator == 0.0) throw bad();
    rest = rest.substr(0, slash);
  }

  double numerator;
  if (auto pi = rest.find("pi"); pi != std::string_view::npos) {
    if (pi + 2 != rest.size()) throw bad();
    std::string_view coef = rest.substr(0, pi);
    numerator = (coef.empty() ? 1.0 : parse_number(coef)) * M_PI;
  } else {
    if (rest.empty()) throw bad();
    numerator = parse_number(rest);
  }
  return sign * numerator / denominator;
}

/// Parses "start:stop:count" into an inclusive linear grid.
inline std::vector<double> parse_theta_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ':') {
      parts.push_back(spec.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  if (parts.size() != 3) {
    throw std::invalid_argument("theta grid must be start:stop:count, got '" +
                                std::string(spec) + "'");
  }
  double start = parse_angle(parts[0]);
  double stop = parse_angle(parts[1]);
  long count = 0;
  auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
  if (ec != std::errc() || ptr != parts[2].data() + parts[2].size() || count < 1) {
    throw std::invalid_argument("theta grid count must be a positive integer");
  }
  std::vector<double> grid;
  grid.reserve(count);
  if (count == 1) {
    grid.push_back(start);
  } else {
    for (long k = 0; k < count; ++k) {
      grid.push_back(start + (stop - start) * static_cast<double>(k) / (count - 1));
    }
  }
  return grid;
}

inline std::vector<int> parse_int_list(std::string_view spec) {
  std::vector<int> values;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ',') {
      std::string_view part = spec.substr(begin, i - begin);
      int v = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || ptr != part.data() + part.size()) {
        throw std::invalid_argument("cannot parse integer list '" + std::string(spec) + "'");
      }
      values.push_back(v);
      begin = i + 1;
    }
  }
  return values;
}

/// Parses the four CHSH settings "a:a':b:b'".
inline std::array<double, 4> parse_settings(std::string_view spec) {
  std::array<double, 4> out{};
  std::size_t begin = 0;
  int k = 0;
  for (std::size_t i = 0; i <= spec.size(); ++i) {
    if (i == spec.size() || spec[i] == ':') {
      if (k >= 4) throw std::invalid_argument("settings need exactly four angles a:a':b:b'");
      out[k++] = parse_angle(spec.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  if (k != 4) throw std::invalid_argument("settings need exactly four angles a:a':b:b'");
  return out;
}

/// Parses "uniform" or "gibbs:<beta>".
inline detector::DistSpec parse_dist(std::string_view spec) {
  if (spec == "uniform") return detector::DistSpec::uniform();
  constexpr std::string_view prefix = "gibbs:";
  if (spec.substr(0, prefix.size()) == prefix) {
    std::string_view beta_text = spec.substr(prefix.size());
    double beta = 0.0;
    auto [ptr, ec] =
        std::from_chars(beta_text.data(), beta_text.data() + beta_text.size(), beta);
    if (ec == std::errc() && ptr == beta_text.data() + beta_text.size() && beta >= 0.0) {
      return detector::DistSpec::gibbs(beta);
    }
  }
  throw std::invalid_argument("distribution must be 'uniform' or 'gibbs:<beta>', got '" +
                              std::string(spec) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  Study study = Study::correlate;
  std::uint64_t seed = 1;
  /// Internal dimensions. For correlate/chsh/nosignal: one value for all
  /// four detectors or four per-detector values. For decohere-scan and
  /// oracle-check: the list of M values to sweep.
  std::vector<int> m_values;
  detector::DistSpec dist = detector::DistSpec::uniform();
  std::vector<double> theta_grid;
  long n_trials = 100000;
  /// Seeds per scan point (decohere-scan, oracle-check).
  long n_seeds = 0;
  std::array<double, 4> chsh_settings = {0.0, M_PI / 4.0, M_PI / 8.0, 3.0 * M_PI / 8.0};
  /// The audited station's own setting in the nosignal study.
  double theta_fixed = 0.0;
  std::string out_dir = ".";
  /// 0 = use all hardware threads.
  int workers = 0;
};

/// Fills in per-study defaults for fields the user left empty.
inline ExperimentConfig normalized(ExperimentConfig config) {
  if (config.m_values.empty()) {
    switch (config.study) {
      case Study::decohere_scan: config.m_values = {2, 4, 8, 16, 32}; break;
      case Study::oracle_check: config.m_values = {1, 2, 3}; break;
      default: config.m_values = {8}; break;
    }
  }
  if (config.theta_grid.empty()) {
    switch (config.study) {
      case Study::correlate:
        config.theta_grid = parse_theta_grid("0:pi/2:9");
        break;
      case Study::nosignal:
        config.theta_grid = parse_theta_grid("0:pi/2:5");
        break;
      case Study::oracle_check:
        config.theta_grid = {0.0, M_PI / 8.0, M_PI / 4.0};
        break;
      default: break;
    }
  }
  if (config.n_seeds == 0) {
    config.n_seeds = config.study == Study::oracle_check ? 20 : 1000;
  }
  return config;
}

/// Per-detector dimensions for the single-experiment studies.
inline std::array<int, 4> detector_dims(const ExperimentConfig& config) {
  if (config.m_values.size() == 1) {
    int m = config.m_values[0];
    return {m, m, m, m};
  }
  if (config.m_values.size() == 4) {
    return {config.m_values[0], config.m_values[1], config.m_values[2], config.m_values[3]};
  }
  throw std::invalid_argument("--M needs one value or four per-detector values");
}

inline void validate(const ExperimentConfig& config) {
  if (config.n_trials < 1) throw std::invalid_argument("--n must be >= 1");
  if (config.n_seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  if (config.m_values.empty()) throw std::invalid_argument("--M must not be empty");
  for (int m : config.m_values) {
    if (m < 1) throw std::invalid_argument("--M entries must be >= 1");
  }
  for (double theta : config.theta_grid) {
    if (!std::isfinite(theta)) throw std::invalid_argument("theta grid has non-finite entry");
  }
  if (config.workers < 0) throw std::invalid_argument("--workers must be >= 0");
  switch (config.study) {
    case Study::correlate:
    case Study::nosignal:
      if (config.theta_grid.empty()) throw std::invalid_argument("theta grid is empty");
      detector_dims(config);
      break;
    case Study::chsh:
      detector_dims(config);
      if (config.n_trials < 100) {
        throw std::invalid_argument("chsh needs --n >= 100 per setting pair");
      }
      break;
    case Study::decohere_scan:
      break;
    case Study::oracle_check:
      for (int m : config.m_values) {
        std::size_t side = 16;
        for (int d = 0; d < 4; ++d) side *= static_cast<std::size_t>(m);
        if (side > qstate::kDenseMatrixSideCap) {
          throw std::length_error(
              "oracle-check: dense side 16*M^4 = " + std::to_string(side) +
              " exceeds the dense matrix cap " +
              std::to_string(qstate::kDenseMatrixSideCap) + " (use M <= 3)");
        }
      }
      break;
  }
}

// ---------------------------------------------------------------------------
// Deterministic fan-out

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). Work items must be independent; results keyed by i are
/// deterministic regardless of the worker count.
template <typename Fn>
void parallel_for(long n, int workers, Fn&& fn) {
  int n_threads = workers > 0 ? workers
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = static_cast<int>(std::min<long>(n_threads, n));
  if (n_threads <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    long begin = n * t / n_threads;
    long end = n * (t + 1) / n_threads;
    pool.emplace_back([begin, end, &fn] {
      for (long i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& thread : pool) thread.join();
}

// ---------------------------------------------------------------------------
// Study machinery

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct StudyOutput {
  json results = json::object();
  std::vector<std::string> csv_columns;
  std::vector<std::vector<std::string>> csv_rows;
  std::vector<Check> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check& c) { return c.pass; });
  }
};

namespace detail {

inline constexpr std::uint64_t kTrialSalt = 0x7A;
inline constexpr std::uint64_t kScanSalt = 0xD5;
inline constexpr std::uint64_t kOracleSalt = 0x0C;

/// Collects n trials at one setting pair, parallel over trial index.
inline std::vector<correlate::TrialRecord> collect_trials(
    double theta_a, double theta_b, long n,
    const std::array<detector::DetectorModel, 4>& detectors, std::uint64_t seed,
    std::uint64_t group_salt, int workers) {
  std::vector<correlate::TrialRecord> trials(n);
  parallel_for(n, workers, [&](long i) {
    rng::Stream stream = rng::Stream::derived(seed, kTrialSalt, group_salt, i);
    trials[i] = correlate::sample_trial(i, theta_a, theta_b, detectors, stream);
  });
  return trials;
}

inline std::string pass_tag(bool pass) { return pass ? "[PASS]" : "[FAIL]"; }

}  // namespace detail

inline StudyOutput run_correlate(const ExperimentConfig& config) {
  StudyOutput out;
  out.csv_columns = {"theta", "estimate", "std_error", "theory"};
  std::array<detector::DetectorModel, 4> detectors =
      detector::make_detector_array(detector_dims(config), config.dist, config.seed);

  json points = json::array();
  for (std::size_t p = 0; p < config.theta_grid.size(); ++p) {
    double theta = config.theta_grid[p];
    std::vector<correlate::TrialRecord> trials = detail::collect_trials(
        0.0, theta, config.n_trials, detectors, config.seed, p, config.workers);
    correlate::CorrelationEstimate est = correlate::correlation(trials);

    points.push_back({{"theta", theta},
                      {"n_trials", est.n_trials},
                      {"estimate", est.mean_product},
                      {"std_error", est.std_error},
                      {"theory", est.theory}});
    out.csv_rows.push_back({report::format_double(theta),
                            report::format_double(est.mean_product),
                            report::format_double(est.std_error),
                            report::format_double(est.theory)});

    double diff = std::abs(est.mean_product - est.theory);
    out.checks.push_back(
        {"correlation[theta=" + report::format_double(theta) + "]",
         diff <= 4.0 * est.std_error,
         "|estimate - theory| = " + report::format_double(diff) +
             " vs 4*std_error = " + report::format_double(4.0 * est.std_error)});
  }
  out.results["points"] = points;
  return out;
}

inline StudyOutput run_decohere_scan(const ExperimentConfig& config) {
  StudyOutput out;
  out.csv_columns = {"M", "median_offdiag", "mean_abs_f_sq", "expected_abs_f_sq"};

  const long n_f2_samples = std::max<long>(10000, 4 * config.n_seeds);
  chain::BranchSet branches = chain::build_branches(0.0);

  std::vector<double> log_m, log_median;
  json rows = json::array();
  for (std::size_t mi = 0; mi < config.m_values.size(); ++mi) {
    int m = config.m_values[mi];

    // Median surviving coherence over independently seeded detector arrays.
    std::vector<double> offdiag(config.n_seeds);
    parallel_for(config.n_seeds, config.workers, [&](long k) {
      std::uint64_t run_seed = rng::derive_seed(config.seed, detail::kScanSalt, mi, k);
      std::array<detector::DetectorModel, 4> detectors =
          detector::make_detector_array({m, m, m, m}, config.dist, run_seed);
      offdiag[k] =
          chain::offdiagonal_norm(chain::reduced_density_structured(branches, detectors));
    });
    double med = stats::median(offdiag);

    // Per-detector suppression law, estimated from single detectors.
    std::vector<double> f2(n_f2_samples);
    parallel_for(n_f2_samples, config.workers, [&](long k) {
      std::uint64_t run_seed = rng::derive_seed(config.seed, detail::kScanSalt, mi, 0xF2u, k);
      detector::DetectorModel d = detector::make_detector(
          detector::DetectorId::all()[0], m, config.dist, run_seed);
      f2[k] = std::norm(detector::decoherence_factor(d));
    });
    double mean_f2 = 0.0;
    for (double v : f2) mean_f2 += v;
    mean_f2 /= n_f2_samples;
    double expected_f2 = config.dist.realize(m).sum_squares() / m;

    rows.push_back({{"M", m},
                    {"median_offdiag", med},
                    {"mean_abs_f_sq", mean_f2},
                    {"expected_abs_f_sq", expected_f2},
                    {"n_seeds", config.n_seeds},
                    {"n_f_samples", n_f2_samples}});
    out.csv_rows.push_back({std::to_string(m), report::format_double(med),
                            report::format_double(mean_f2),
                            report::format_double(expected_f2)});

    double rel = std::abs(mean_f2 - expected_f2) / expected_f2;
    out.checks.push_back({"suppression[M=" + std::to_string(m) + "]", rel <= 0.10,
                          "E|f|^2 = " + report::format_double(mean_f2) + " vs (sum p^2)/M = " +
                              report::format_double(expected_f2) + " (rel err " +
                              report::format_double(rel) + ", tol 0.1)"});

    log_m.push_back(std::log(static_cast<double>(m)));
    log_median.push_back(std::log(med));
  }

  out.results["points"] = rows;
  if (log_m.size() >= 2) {
    stats::LineFit fit = stats::fit_line(log_m, log_median);
    out.results["loglog_slope"] = fit.slope;
    out.checks.push_back({"offdiag-scaling-slope", std::abs(fit.slope + 4.0) <= 0.3,
                          "log-log slope = " + report::format_double(fit.slope) +
                              " vs -4 +/- 0.3"});
  }
  return out;
}

inline StudyOutput run_chsh(const ExperimentConfig& config) {
  StudyOutput out;
  out.csv_columns = {"pair", "theta_a", "theta_b", "estimate", "std_error", "theory"};
  std::array<detector::DetectorModel, 4> detectors =
      detector::make_detector_array(detector_dims(config), config.dist, config.seed);

  correlate::ChshEstimate est =
      correlate::chsh(config.chsh_settings, config.n_trials, detectors, config.seed);

  const std::array<std::string, 4> labels = {"a,b", "a,b'", "a',b", "a',b'"};
  const std::array<std::array<double, 2>, 4> pairs = {
      {{config.chsh_settings[0], config.chsh_settings[2]},
       {config.chsh_settings[0], config.chsh_settings[3]},
       {config.chsh_settings[1], config.chsh_settings[2]},
       {config.chsh_settings[1], config.chsh_settings[3]}}};

  json terms = json::array();
  for (int k = 0; k < 4; ++k) {
    terms.push_back({{"pair", labels[k]},
                     {"theta_a", pairs[k][0]},
                     {"theta_b", pairs[k][1]},
                     {"estimate", est.terms[k].mean_product},
                     {"std_error", est.terms[k].std_error},
                     {"theory", est.terms[k].theory}});
    out.csv_rows.push_back(
        {labels[k], report::format_double(pairs[k][0]), report::format_double(pairs[k][1]),
         report::format_double(est.terms[k].mean_product),
         report::format_double(est.terms[k].std_error),
         report::format_double(est.terms[k].theory)});
  }
  out.results["terms"] = terms;
  out.results["s"] = est.s;
  out.results["s_std_error"] = est.std_error;
  out.results["s_theory"] = est.theory;
  out.results["violates_classical_bound"] = est.violates_classical_bound;

  double diff = std::abs(est.s - est.theory);
  out.checks.push_back({"chsh-consistent-with-theory", diff <= 4.0 * est.std_error,
                        "|S - theory| = " + report::format_double(diff) +
                            " vs 4*std_error = " +
                            report::format_double(4.0 * est.std_error)});
  out.checks.push_back({"chsh-bound-flag",
                        est.violates_classical_bound == (std::abs(est.s) > 2.0),
                        "|S| = " + report::format_double(std::abs(est.s)) +
                            (est.violates_classical_bound ? " > 2 flagged" : " <= 2")});
  return out;
}

inline StudyOutput run_nosignal(const ExperimentConfig& config) {
  StudyOutput out;
  out.csv_columns = {"station", "theta_local", "theta_remote", "n", "freq_plus", "dev_sigma"};
  std::array<detector::DetectorModel, 4> detectors =
      detector::make_detector_array(detector_dims(config), config.dist, config.seed);

  json reports = json::array();
  for (detector::Station audited : {detector::Station::left, detector::Station::right}) {
    bool left = audited == detector::Station::left;
    std::vector<correlate::TrialRecord> trials;
    trials.reserve(config.theta_grid.size() * config.n_trials);
    for (std::size_t g = 0; g < config.theta_grid.size(); ++g) {
      double remote = config.theta_grid[g];
      double theta_a = left ? config.theta_fixed : remote;
      double theta_b = left ? remote : config.theta_fixed;
      std::uint64_t group_salt = (left ? 0x100 : 0x200) + g;
      auto group = detail::collect_trials(theta_a, theta_b, config.n_trials, detectors,
                                          config.seed, group_salt, config.workers);
      trials.insert(trials.end(), group.begin(), group.end());
    }
    correlate::NosignalReport audit = correlate::nosignal_audit(trials, audited);

    std::string station = left ? "L" : "R";
    json groups = json::array();
    double worst_dev = 0.0;
    for (const auto& g : audit.groups) {
      groups.push_back({{"theta_remote", g.theta_remote},
                        {"n", g.n},
                        {"freq_plus", g.freq_plus},
                        {"dev_sigma", g.dev_sigma}});
      out.csv_rows.push_back({station, report::format_double(audit.theta_local),
                              report::format_double(g.theta_remote), std::to_string(g.n),
                              report::format_double(g.freq_plus),
                              report::format_double(g.dev_sigma)});
      worst_dev = std::max(worst_dev, g.dev_sigma);
    }
    reports.push_back({{"station", station},
                       {"theta_local", audit.theta_local},
                       {"groups", groups},
                       {"max_pairwise_diff", audit.max_pairwise_diff},
                       {"max_pairwise_sigma", audit.max_pairwise_sigma},
                       {"pass", audit.pass}});

    out.checks.push_back({"marginal-flat[" + station + "]", worst_dev <= 4.0,
                          "max |freq - 1/2| = " + report::format_double(worst_dev) +
                              " sigma (tol 4)"});
    out.checks.push_back({"pairwise-independent[" + station + "]", audit.pass,
                          "max pairwise difference = " +
                              report::format_double(audit.max_pairwise_sigma) +
                              " sigma (tol 4)"});
  }
  out.results["audits"] = reports;
  return out;
}

inline StudyOutput run_oracle_check(const ExperimentConfig& config) {
  StudyOutput out;
  out.csv_columns = {"M", "theta", "seed_index", "max_deviation"};

  struct Case {
    int m;
    double theta;
    long seed_index;
  };
  std::vector<Case> cases;
  for (int m : config.m_values) {
    for (double theta : config.theta_grid) {
      for (long k = 0; k < config.n_seeds; ++k) cases.push_back({m, theta, k});
    }
  }

  std::vector<double> deviation(cases.size());
  std::vector<std::uint8_t> sane(cases.size(), 0);
  std::vector<double> diag_gap(cases.size());
  parallel_for(static_cast<long>(cases.size()), config.workers, [&](long i) {
    const Case& c = cases[i];
    chain::BranchSet branches = chain::build_branches(c.theta);
    std::uint64_t run_seed =
        rng::derive_seed(config.seed, detail::kOracleSalt, c.m, c.seed_index);
    std::array<detector::DetectorModel, 4> detectors =
        detector::make_detector_array({c.m, c.m, c.m, c.m}, config.dist, run_seed);
    chain::ReducedDensityMatrix fast = chain::reduced_density_structured(branches, detectors);
    chain::ReducedDensityMatrix dense = chain::reduced_density_dense_oracle(branches, detectors);
    deviation[i] = (fast.entries - dense.entries).cwiseAbs().maxCoeff();

    bool ok = fast.is_hermitian(1e-12) && fast.has_unit_trace(1e-12) &&
              fast.is_positive_semidefinite() && dense.is_hermitian(1e-12) &&
              dense.has_unit_trace(1e-12) && dense.is_positive_semidefinite();
    sane[i] = ok ? 1 : 0;

    // The diagonal must be the branch weights regardless of detectors.
    double gap = 0.0;
    for (std::size_t b = 0; b < branches.branches.size(); ++b) {
      gap = std::max(gap, std::abs(fast.entries(b, b).real() -
                                   std::norm(branches.branches[b].amp)));
      gap = std::max(gap, std::abs(fast.entries(b, b).imag()));
    }
    diag_gap[i] = gap;
  });

  double worst = 0.0, worst_gap = 0.0;
  bool all_sane = true;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    out.csv_rows.push_back({std::to_string(cases[i].m), report::format_double(cases[i].theta),
                            std::to_string(cases[i].seed_index),
                            report::format_double(deviation[i])});
    worst = std::max(worst, deviation[i]);
    worst_gap = std::max(worst_gap, diag_gap[i]);
    all_sane = all_sane && sane[i] != 0;
  }

  out.results["cases"] = static_cast<long>(cases.size());
  out.results["max_deviation"] = worst;
  out.results["max_diagonal_gap"] = worst_gap;
  out.results["tolerance"] = kOracleTol;

  out.checks.push_back({"structured-equals-dense", worst <= kOracleTol,
                        "max entrywise deviation " + report::format_double(worst) +
                            " <= " + report::format_double(kOracleTol)});
  out.checks.push_back({"reduced-matrix-sanity", all_sane,
                        "Hermitian/trace/PSD on every produced matrix"});
  out.checks.push_back({"diagonal-is-branch-weights", worst_gap <= 1e-12,
                        "max diagonal deviation from |amp|^2 = " +
                            report::format_double(worst_gap)});
  return out;
}

inline StudyOutput run_study(const ExperimentConfig& config) {
  switch (config.study) {
    case Study::correlate: return run_correlate(config);
    case Study::decohere_scan: return run_decohere_scan(config);
    case Study::chsh: return run_chsh(config);
    case Study::nosignal: return run_nosignal(config);
    case Study::oracle_check: return run_oracle_check(config);
  }
  throw std::logic_error("run_study: unknown study");
}

// ---------------------------------------------------------------------------
// Report assembly

inline json config_json(const ExperimentConfig& config) {
  return {{"study", study_name(config.study)},
          {"seed", config.seed},
          {"m", config.m_values},
          {"dist",
           {{"kind", config.dist.kind == detector::DistKind::uniform ? "uniform" : "gibbs"},
            {"beta", config.dist.beta}}},
          {"theta_grid", config.theta_grid},
          {"n_trials", config.n_trials},
          {"n_seeds", config.n_seeds},
          {"chsh_settings", config.chsh_settings},
          {"theta_fixed", config.theta_fixed},
          {"workers", config.workers},
          {"out_dir", config.out_dir}};
}

inline json build_report(const ExperimentConfig& config, const StudyOutput& out) {
  json checks = json::array();
  for (const auto& c : out.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"generator", "bellsim"},
          {"study", study_name(config.study)},
          {"config", config_json(config)},
          {"results", out.results},
          {"checks", checks},
          {"pass", out.pass()}};
}

/// Runs one configured study end to end: validates, executes, writes
/// report.json and points.csv under out_dir, prints one line per check.
/// Returns 0 when every check passes, 1 otherwise. Configuration errors
/// throw (the CLI maps them to exit code 2).
inline int run(const ExperimentConfig& raw, std::ostream& log = std::cout) {
  ExperimentConfig config = normalized(raw);
  validate(config);
  StudyOutput out = run_study(config);

  std::filesystem::create_directories(config.out_dir);
  std::filesystem::path dir(config.out_dir);
  json report_doc = build_report(config, out);
  report::write_json((dir / "report.json").string(), report_doc);
  report::write_csv((dir / "points.csv").string(), out.csv_columns, out.csv_rows);

  log << "study: " << study_name(config.study) << "  seed: " << config.seed << "\n";
  for (const auto& check : out.checks) {
    log << detail::pass_tag(check.pass) << " " << check.name << ": " << check.detail << "\n";
  }
  int n_pass = static_cast<int>(
      std::count_if(out.checks.begin(), out.checks.end(), [](const Check& c) { return c.pass; }));
  log << (out.pass() ? "PASS" : "FAIL") << " (" << n_pass << "/" << out.checks.size()
      << " checks)\n";
  log << "wrote " << (dir / "report.json").string() << ", " << (dir / "points.csv").string()
      << "\n";
  return out.pass() ? 0 : 1;
}

}  // namespace bellsim::experiment
