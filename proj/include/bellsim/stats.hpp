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
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bellsim::stats {

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
};

/// Sample mean and standard error (sample std / sqrt(n)).
inline MeanStderr mean_stderr(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_stderr: empty sample");
  long n = static_cast<long>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (n == 1) return {mean, 0.0, n};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double var = ss / (n - 1);
  return {mean, std::sqrt(var / n), n};
}

/// Mean/stderr of a +/-1 sample given its sum; the products recorded per
/// trial are integers, so the sum is exact.
inline MeanStderr mean_stderr_pm1(double sum, long n) {
  if (n < 1) throw std::invalid_argument("mean_stderr_pm1: n must be >= 1");
  double mean = sum / n;
  if (n == 1) return {mean, 0.0, n};
  // For x in {-1, +1}: sum of squares = n, so sample variance has the
  // closed form n (1 - mean^2) / (n - 1).
  double var = static_cast<double>(n) * (1.0 - mean * mean) / (n - 1);
  var = std::max(var, 0.0);
  return {mean, std::sqrt(var / n), n};
}

/// Standard error of a binomial frequency estimate.
inline double binomial_stderr(double p, long n) {
  if (n < 1) throw std::invalid_argument("binomial_stderr: n must be >= 1");
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median: empty sample");
  std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  double hi = xs[mid];
  if (xs.size() % 2 == 1) return hi;
  std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
  return 0.5 * (xs[mid - 1] + hi);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (x, y).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need two or more paired points");
  }
  double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace bellsim::stats
