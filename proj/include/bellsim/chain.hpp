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
#include <string>
#include <vector>

#include "bellsim/detector.hpp"
#include "bellsim/photon.hpp"
#include "bellsim/qstate.hpp"

namespace bellsim::chain {

/// Branch amplitudes below this magnitude are pruned (exact zeros plus
/// trig roundoff at multiples of pi/2).
inline constexpr double kBranchPruneTol = 1e-14;

/// Joint pointer readout of the four-detector array, ordered
/// (LV, LH, RV, RH). Post-absorption configurations have exactly one
/// fired detector per station; (0000) is the ready state.
struct PointerConfiguration {
  std::array<std::uint8_t, 4> bits{};

  std::uint8_t bit(int detector_index) const { return bits[detector_index]; }
  std::uint8_t bit(detector::DetectorId id) const { return bits[id.index()]; }

  bool is_ready() const { return bits == std::array<std::uint8_t, 4>{0, 0, 0, 0}; }

  bool is_post_absorption() const {
    return (bits[0] + bits[1] == 1) && (bits[2] + bits[3] == 1);
  }

  /// Index into the 16-dimensional pointer space, LV most significant.
  int linear_index() const {
    return bits[0] * 8 + bits[1] * 4 + bits[2] * 2 + bits[3];
  }

  std::string to_string() const {
    std::string s;
    for (auto b : bits) s += static_cast<char>('0' + b);
    return s;
  }

  bool operator==(const PointerConfiguration&) const = default;
};

/// The all-zeros ready state of the array.
inline PointerConfiguration ready_state() { return PointerConfiguration{}; }

struct Branch {
  PointerConfiguration config;
  Complex amp;
};

/// Post-absorption superposition of the array: a list of
/// (configuration, amplitude) pairs with squared amplitudes summing to 1.
struct BranchSet {
  std::vector<Branch> branches;

  double total_weight() const {
    double s = 0.0;
    for (const auto& b : branches) s += std::norm(b.amp);
    return s;
  }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(branches.size());
    for (const auto& b : branches) w.push_back(std::norm(b.amp));
    return w;
  }
};

/// Builds the branch set for relative setting angle theta_rel. Each
/// photon-pair amplitude is routed to the configuration that absorbs it:
/// V_L -> LV, H_L -> LH, V'_R -> RV, H'_R -> RH. Branch order is fixed:
/// (1001), (0110), (1010), (0101), with near-zero amplitudes pruned, so
/// theta = 0 yields the two-branch state {(1001): +1/sqrt2, (0110): -1/sqrt2}.
inline BranchSet build_branches(double theta_rel) {
  if (!std::isfinite(theta_rel)) {
    throw std::invalid_argument("build_branches: theta_rel must be finite");
  }
  double t = std::fmod(theta_rel, M_PI);
  if (t < 0.0) t += M_PI;
  photon::PhotonPairState expanded = photon::expand_in_settings(photon::make_singlet(), t);

  // Photon amplitude order (V V', V H', H V', H H') maps to configurations
  // (1010, 1001, 0110, 0101).
  const std::array<PointerConfiguration, 4> configs = {
      PointerConfiguration{{1, 0, 1, 0}}, PointerConfiguration{{1, 0, 0, 1}},
      PointerConfiguration{{0, 1, 1, 0}}, PointerConfiguration{{0, 1, 0, 1}}};

  // Emission order: opposite-outcome branches first, then similar-outcome.
  const std::array<int, 4> order = {1, 2, 0, 3};
  BranchSet set;
  for (int k : order) {
    if (std::abs(expanded.amps[k]) < kBranchPruneTol) continue;
    set.branches.push_back(Branch{configs[k], expanded.amps[k]});
  }
  return set;
}

/// Density matrix over the branch configurations after tracing out all
/// internal degrees of freedom. K x K with K in {2, 4}.
struct ReducedDensityMatrix {
  std::vector<PointerConfiguration> configs;
  Eigen::MatrixXcd entries;

  std::size_t size() const { return configs.size(); }
  Complex trace() const { return entries.trace(); }
  bool is_hermitian(double tol = kAlgebraTol) const {
    return qstate::matrix_is_hermitian(entries, tol);
  }
  bool has_unit_trace(double tol = kAlgebraTol) const {
    return std::abs(trace() - Complex(1.0)) <= tol;
  }
  double min_eigenvalue() const { return qstate::matrix_min_eigenvalue(entries); }
  bool is_positive_semidefinite(double floor = kPsdEigenvalueFloor) const {
    return min_eigenvalue() >= floor;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(size());
    for (std::size_t i = 0; i < size(); ++i) d[i] = entries(i, i).real();
    return d;
  }
};

namespace detail {

inline void require_standard_array(const std::array<detector::DetectorModel, 4>& detectors) {
  const auto& ids = detector::DetectorId::all();
  for (int k = 0; k < 4; ++k) {
    if (!(detectors[k].id == ids[k])) {
      throw std::invalid_argument(
          "detector array must be ordered (LV, LH, RV, RH) to match configuration bits");
    }
  }
}

inline void require_normalized(const BranchSet& branches) {
  if (branches.branches.empty() ||
      std::abs(branches.total_weight() - 1.0) > kAlgebraTol) {
    throw std::invalid_argument("branch set is not normalized");
  }
}

}  // namespace detail

/// Reduced density matrix via the per-detector factorization. The entry
/// for branches (row r, column c) is
///   amp_r * conj(amp_c) * prod_d g_d,
/// where g_d = 1 when the branches agree on detector d, g_d = f_d (the
/// decoherence factor) when d fires on the row side only, and
/// g_d = conj(f_d) when d fires on the column side only. The diagonal is
/// exactly the branch weights, independent of the detector models.
inline ReducedDensityMatrix reduced_density_structured(
    const BranchSet& branches, const std::array<detector::DetectorModel, 4>& detectors) {
  detail::require_normalized(branches);
  detail::require_standard_array(detectors);

  std::array<Complex, 4> f;
  for (int d = 0; d < 4; ++d) f[d] = detector::decoherence_factor(detectors[d]);

  const std::size_t k = branches.branches.size();
  ReducedDensityMatrix rho;
  rho.entries = Eigen::MatrixXcd(k, k);
  rho.configs.reserve(k);
  for (const auto& b : branches.branches) rho.configs.push_back(b.config);

  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      Complex entry = branches.branches[r].amp * std::conj(branches.branches[c].amp);
      for (int d = 0; d < 4; ++d) {
        std::uint8_t row_bit = branches.branches[r].config.bits[d];
        std::uint8_t col_bit = branches.branches[c].config.bits[d];
        if (row_bit == col_bit) continue;
        entry *= (row_bit == 1) ? f[d] : std::conj(f[d]);
      }
      rho.entries(r, c) = entry;
    }
  }
  return rho;
}

/// Small-M oracle: materializes the full ensemble density matrix over
/// pointer and internal factors, one element per internal assignment
/// (mu, nu, sigma, tau), then partial-traces the internals with qstate.
/// Equals the structured result within 1e-12; feasible only under the
/// dense caps.
inline ReducedDensityMatrix reduced_density_dense_oracle(
    const BranchSet& branches, const std::array<detector::DetectorModel, 4>& detectors) {
  detail::require_normalized(branches);
  detail::require_standard_array(detectors);

  // Interleaved dims: pointer factor before internal factor per detector.
  std::vector<int> dims;
  for (int d = 0; d < 4; ++d) {
    dims.push_back(2);
    dims.push_back(detectors[d].dim());
  }
  std::size_t side = qstate::checked_dim_product(dims, qstate::kDenseMatrixSideCap,
                                                 "reduced_density_dense_oracle");

  Eigen::MatrixXcd rho_full = Eigen::MatrixXcd::Zero(side, side);
  std::array<int, 4> internal{0, 0, 0, 0};
  while (true) {
    double weight = 1.0;
    for (int d = 0; d < 4; ++d) weight *= detectors[d].dist.weights[internal[d]];

    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(side);
    for (const auto& branch : branches.branches) {
      qstate::Ket element({1}, Eigen::VectorXcd::Ones(1));
      for (int d = 0; d < 4; ++d) {
        int bit = branch.config.bits[d];
        qstate::Ket pointer = qstate::Ket::basis(2, bit);
        qstate::Ket internal_state =
            bit == 1 ? qstate::Ket({detectors[d].dim()},
                                   detectors[d].absorption.col(internal[d]))
                     : qstate::Ket::basis(detectors[d].dim(), internal[d]);
        element = qstate::tensor(element, qstate::tensor(pointer, internal_state));
      }
      psi += branch.amp * element.amps;
    }

    // Outer-product accumulation. Each branch populates a single pointer
    // block, so psi has at most (branches) * max(M)^2 nonzeros; skipping
    // its exact zeros skips whole blocks of untouched entries.
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      if (psi(i) != Complex(0.0)) support.push_back(i);
    }
    for (Eigen::Index r : support) {
      Complex wr = weight * psi(r);
      for (Eigen::Index c : support) {
        rho_full(r, c) += wr * std::conj(psi(c));
      }
    }

    int d = 3;
    while (d >= 0 && ++internal[d] == detectors[d].dim()) internal[d--] = 0;
    if (d < 0) break;
  }

  qstate::DensityMatrix mixed(dims, std::move(rho_full));
  qstate::DensityMatrix pointer_space = qstate::partial_trace(mixed, {0, 2, 4, 6});

  const std::size_t k = branches.branches.size();
  ReducedDensityMatrix rho;
  rho.entries = Eigen::MatrixXcd(k, k);
  rho.configs.reserve(k);
  for (const auto& b : branches.branches) rho.configs.push_back(b.config);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      rho.entries(r, c) = pointer_space.entries(rho.configs[r].linear_index(),
                                                rho.configs[c].linear_index());
    }
  }
  return rho;
}

/// Largest off-diagonal magnitude.
inline double offdiagonal_norm(const ReducedDensityMatrix& rho) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < rho.entries.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.entries.cols(); ++c) {
      if (r == c) continue;
      worst = std::max(worst, std::abs(rho.entries(r, c)));
    }
  }
  return worst;
}

}  // namespace bellsim::chain
