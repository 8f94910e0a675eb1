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

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bellsim/chain.hpp"
#include "bellsim/detector.hpp"
#include "bellsim/rng.hpp"
#include "bellsim/stats.hpp"

namespace bellsim::correlate {

/// Z value read by a station's robot from its V-detector: +1 for pointer 0,
/// -1 for pointer 1.
inline int z_encode(const chain::PointerConfiguration& config, detector::Station station) {
  if (!config.is_post_absorption()) {
    throw std::invalid_argument("z_encode: configuration has no outcome yet");
  }
  int v_index = station == detector::Station::left ? 0 : 2;
  return config.bits[v_index] == 0 ? +1 : -1;
}

/// True iff every branch is an eigenstate of Z_LV * Z_RV with eigenvalue -1,
/// i.e. all branches carry opposite outcomes. Holds for the theta_rel = 0
/// branch set and fails otherwise.
inline bool check_eigen_identity(const chain::BranchSet& branches) {
  for (const auto& b : branches.branches) {
    if (z_encode(b.config, detector::Station::left) *
            z_encode(b.config, detector::Station::right) !=
        -1) {
      return false;
    }
  }
  return !branches.branches.empty();
}

/// One Monte Carlo measurement. Both Z entries and Clara's product come
/// from the same sampled branch; the internal-state draws are logged per
/// detector in array order.
struct TrialRecord {
  long trial_index = 0;
  double theta_a = 0.0;
  double theta_b = 0.0;
  chain::PointerConfiguration branch;
  int z_left = 0;
  int z_right = 0;
  int clara_product = 0;
  std::array<int, 4> internal_draws{};
};

/// Samples one trial: the branch is drawn with probability |amp|^2 (the
/// diagonal of the reduced density matrix), then the Z values are read off
/// that single branch. Draw order per trial is fixed: one uniform for the
/// branch, then the four internal states in detector order.
inline TrialRecord sample_trial(long trial_index, double theta_a, double theta_b,
                                const std::array<detector::DetectorModel, 4>& detectors,
                                rng::Stream& stream) {
  chain::BranchSet branches = chain::build_branches(theta_b - theta_a);
  std::vector<double> weights = branches.weights();
  int picked = stream.sample_discrete(weights);

  TrialRecord record;
  record.trial_index = trial_index;
  record.theta_a = theta_a;
  record.theta_b = theta_b;
  record.branch = branches.branches[picked].config;
  record.z_left = z_encode(record.branch, detector::Station::left);
  record.z_right = z_encode(record.branch, detector::Station::right);
  record.clara_product = record.z_left * record.z_right;
  for (int d = 0; d < 4; ++d) {
    record.internal_draws[d] = detector::sample_internal(detectors[d], stream);
  }
  return record;
}

struct CorrelationEstimate {
  double theta_rel = 0.0;
  long n_trials = 0;
  double mean_product = 0.0;
  double std_error = 0.0;
  /// Closed-form reference -cos(2 theta_rel).
  double theory = 0.0;
};

inline double correlation_theory(double theta_rel) { return -std::cos(2.0 * theta_rel); }

/// Clara's average product over trials that share one setting pair.
inline CorrelationEstimate correlation(const std::vector<TrialRecord>& trials) {
  if (trials.empty()) throw std::invalid_argument("correlation: no trials");
  double sum = 0.0;
  for (const auto& t : trials) {
    if (t.theta_a != trials.front().theta_a || t.theta_b != trials.front().theta_b) {
      throw std::invalid_argument("correlation: trials mix different settings");
    }
    sum += t.clara_product;
  }
  stats::MeanStderr ms = stats::mean_stderr_pm1(sum, static_cast<long>(trials.size()));
  double theta_rel = trials.front().theta_b - trials.front().theta_a;
  return CorrelationEstimate{theta_rel, ms.n, ms.mean, ms.std_error,
                             correlation_theory(theta_rel)};
}

struct ChshEstimate {
  /// S = C(a,b) - C(a,b') + C(a',b) + C(a',b').
  double s = 0.0;
  double std_error = 0.0;
  double theory = 0.0;
  std::array<CorrelationEstimate, 4> terms{};
  bool violates_classical_bound = false;
};

/// Estimates the CHSH statistic at settings (a, a', b, b') with
/// n_trials_each per setting pair. Trials derive their streams from
/// (seed, pair index, trial index).
inline ChshEstimate chsh(const std::array<double, 4>& settings, long n_trials_each,
                         const std::array<detector::DetectorModel, 4>& detectors,
                         std::uint64_t seed) {
  if (n_trials_each < 100) {
    throw std::invalid_argument("chsh: need at least 100 trials per setting pair");
  }
  const double a = settings[0], a_prime = settings[1];
  const double b = settings[2], b_prime = settings[3];
  const std::array<std::array<double, 2>, 4> pairs = {
      {{a, b}, {a, b_prime}, {a_prime, b}, {a_prime, b_prime}}};
  const std::array<double, 4> sign = {+1.0, -1.0, +1.0, +1.0};

  ChshEstimate est;
  double var = 0.0;
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0;
    for (long i = 0; i < n_trials_each; ++i) {
      rng::Stream stream = rng::Stream::derived(seed, 0xC5u, k, i);
      TrialRecord t = sample_trial(i, pairs[k][0], pairs[k][1], detectors, stream);
      sum += t.clara_product;
    }
    stats::MeanStderr ms = stats::mean_stderr_pm1(sum, n_trials_each);
    double theta_rel = pairs[k][1] - pairs[k][0];
    est.terms[k] = CorrelationEstimate{theta_rel, ms.n, ms.mean, ms.std_error,
                                       correlation_theory(theta_rel)};
    est.s += sign[k] * ms.mean;
    est.theory += sign[k] * correlation_theory(theta_rel);
    var += ms.std_error * ms.std_error;
  }
  est.std_error = std::sqrt(var);
  est.violates_classical_bound = std::abs(est.s) > 2.0;
  return est;
}

/// Marginal of one audited group: trials sharing the remote station's
/// setting.
struct MarginalGroup {
  double theta_remote = 0.0;
  long n = 0;
  long plus_count = 0;
  double freq_plus = 0.0;
  /// |freq - 1/2| measured in binomial standard deviations of 1/2.
  double dev_sigma = 0.0;
};

struct NosignalReport {
  detector::Station audited = detector::Station::left;
  double theta_local = 0.0;
  std::vector<MarginalGroup> groups;
  double max_pairwise_diff = 0.0;
  /// Largest pairwise difference measured against its pooled binomial
  /// standard error.
  double max_pairwise_sigma = 0.0;
  bool pass = false;
};

/// Audits whether the audited station's outcome frequency depends on the
/// remote station's setting. Groups trials by the remote setting; passes
/// iff every pairwise difference of the +1 frequencies is within 4 pooled
/// binomial standard errors of zero.
inline NosignalReport nosignal_audit(const std::vector<TrialRecord>& trials,
                                     detector::Station audited = detector::Station::left) {
  if (trials.empty()) throw std::invalid_argument("nosignal_audit: no trials");

  auto local_theta = [&](const TrialRecord& t) {
    return audited == detector::Station::left ? t.theta_a : t.theta_b;
  };
  auto remote_theta = [&](const TrialRecord& t) {
    return audited == detector::Station::left ? t.theta_b : t.theta_a;
  };
  auto z_value = [&](const TrialRecord& t) {
    return audited == detector::Station::left ? t.z_left : t.z_right;
  };

  NosignalReport report;
  report.audited = audited;
  report.theta_local = local_theta(trials.front());

  for (const auto& t : trials) {
    if (local_theta(t) != report.theta_local) {
      throw std::invalid_argument("nosignal_audit: audited station's setting is not fixed");
    }
    double remote = remote_theta(t);
    MarginalGroup* group = nullptr;
    for (auto& g : report.groups) {
      if (g.theta_remote == remote) {
        group = &g;
        break;
      }
    }
    if (group == nullptr) {
      report.groups.push_back(MarginalGroup{remote, 0, 0, 0.0, 0.0});
      group = &report.groups.back();
    }
    group->n += 1;
    if (z_value(t) == +1) group->plus_count += 1;
  }
  if (report.groups.size() < 2) {
    throw std::invalid_argument("nosignal_audit: need at least two remote settings");
  }

  for (auto& g : report.groups) {
    g.freq_plus = static_cast<double>(g.plus_count) / g.n;
    g.dev_sigma = std::abs(g.freq_plus - 0.5) / stats::binomial_stderr(0.5, g.n);
  }

  for (std::size_t i = 0; i < report.groups.size(); ++i) {
    for (std::size_t j = i + 1; j < report.groups.size(); ++j) {
      const auto& gi = report.groups[i];
      const auto& gj = report.groups[j];
      double diff = std::abs(gi.freq_plus - gj.freq_plus);
      double pooled = static_cast<double>(gi.plus_count + gj.plus_count) / (gi.n + gj.n);
      double se = std::sqrt(std::max(pooled * (1.0 - pooled), 1e-300) *
                            (1.0 / gi.n + 1.0 / gj.n));
      report.max_pairwise_diff = std::max(report.max_pairwise_diff, diff);
      report.max_pairwise_sigma = std::max(report.max_pairwise_sigma, diff / se);
    }
  }
  report.pass = report.max_pairwise_sigma <= 4.0;
  return report;
}

}  // namespace bellsim::correlate
