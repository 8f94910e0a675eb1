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

#include <cmath>
#include <vector>

#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim::testing {

inline bool close(Complex a, Complex b, double tol = 1e-12) {
  return std::abs(a - b) <= tol;
}

inline qstate::Ket random_ket(const std::vector<int>& dims, rng::Stream& stream) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  Eigen::VectorXcd amps(n);
  for (std::size_t i = 0; i < n; ++i) {
    amps(i) = Complex(stream.normal(), stream.normal());
  }
  amps.normalize();
  return qstate::Ket(dims, std::move(amps));
}

/// Random mixture of pure states: Hermitian, PSD, unit trace by construction.
inline qstate::DensityMatrix random_density_matrix(const std::vector<int>& dims,
                                                   int n_pure, rng::Stream& stream) {
  std::vector<double> w(n_pure);
  double total = 0.0;
  for (auto& x : w) {
    x = stream.uniform() + 1e-3;
    total += x;
  }
  qstate::DensityMatrix rho;
  for (int i = 0; i < n_pure; ++i) {
    qstate::Ket psi = random_ket(dims, stream);
    qstate::DensityMatrix term = qstate::outer(psi, psi);
    if (i == 0) {
      rho = term;
      rho.entries *= w[i] / total;
    } else {
      rho.entries += (w[i] / total) * term.entries;
    }
  }
  return rho;
}

}  // namespace bellsim::testing
