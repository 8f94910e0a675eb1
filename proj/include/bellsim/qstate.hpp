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

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bellsim {

using Complex = std::complex<double>;

/// Tolerance for algebraic identities (normalization, Hermiticity, traces).
inline constexpr double kAlgebraTol = 1e-12;
/// Eigenvalue floor for positive-semidefiniteness checks.
inline constexpr double kPsdEigenvalueFloor = -1e-10;
/// Tolerance for unitarity checks.
inline constexpr double kUnitaryTol = 1e-10;

namespace qstate {

/// Hard cap on the dense Hilbert-space dimension (product of subsystem
/// dims). Larger spaces must use the structured path in `chain`.
inline constexpr std::size_t kDenseKetCap = std::size_t{1} << 20;
/// Side cap for dense density matrices; a side of 2^11 already means
/// 2^22 complex entries (~64 MiB).
inline constexpr std::size_t kDenseMatrixSideCap = std::size_t{1} << 11;

inline std::size_t checked_dim_product(const std::vector<int>& dims,
                                        std::size_t cap,
                                        const char* what) {
  std::size_t n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument(std::string(what) + ": subsystem dimension < 1");
    n *= static_cast<std::size_t>(d);
    if (n > cap) {
      throw std::length_error(std::string(what) + ": product of dims exceeds dense cap " +
                              std::to_string(cap));
    }
  }
  return n;
}

/// State vector over an ordered list of subsystems. The composite index is
/// row-major: the first subsystem varies slowest.
struct Ket {
  std::vector<int> dims;
  Eigen::VectorXcd amps;

  Ket() = default;
  Ket(std::vector<int> dims_, Eigen::VectorXcd amps_)
      : dims(std::move(dims_)), amps(std::move(amps_)) {
    std::size_t n = checked_dim_product(dims, kDenseKetCap, "Ket");
    if (static_cast<std::size_t>(amps.size()) != n) {
      throw std::invalid_argument("Ket: amplitude length does not match product of dims");
    }
  }

  /// Computational basis vector |index> in a single subsystem of size dim.
  static Ket basis(int dim, int index) {
    if (dim < 1 || index < 0 || index >= dim) {
      throw std::invalid_argument("Ket::basis: index out of range");
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
    v(index) = 1.0;
    return Ket({dim}, std::move(v));
  }

  bool is_finite() const { return amps.allFinite(); }
  double norm() const { return amps.norm(); }
  bool is_normalized(double tol = kAlgebraTol) const {
    return std::abs(amps.squaredNorm() - 1.0) <= tol;
  }
};

/// Square operator over an ordered list of subsystems. Despite the name it
/// is not constrained to be a state: outer(a, b) with a != b is a valid
/// non-Hermitian operator. Validation predicates are provided for the
/// cases that must be states.
struct DensityMatrix {
  std::vector<int> dims;
  Eigen::MatrixXcd entries;

  DensityMatrix() = default;
  DensityMatrix(std::vector<int> dims_, Eigen::MatrixXcd entries_)
      : dims(std::move(dims_)), entries(std::move(entries_)) {
    std::size_t n = checked_dim_product(dims, kDenseMatrixSideCap, "DensityMatrix");
    if (static_cast<std::size_t>(entries.rows()) != n ||
        static_cast<std::size_t>(entries.cols()) != n) {
      throw std::invalid_argument("DensityMatrix: entries must be square with side = product of dims");
    }
  }

  std::size_t side() const { return static_cast<std::size_t>(entries.rows()); }
  Complex trace() const { return entries.trace(); }
  bool is_finite() const { return entries.allFinite(); }

  bool is_hermitian(double tol = kAlgebraTol) const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  bool has_unit_trace(double tol = kAlgebraTol) const {
    return std::abs(trace() - Complex(1.0, 0.0)) <= tol;
  }

  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

  bool is_positive_semidefinite(double floor = kPsdEigenvalueFloor) const {
    return min_eigenvalue() >= floor;
  }
};

/// Hermiticity check for a raw matrix (shared with the chain module).
inline bool matrix_is_hermitian(const Eigen::MatrixXcd& m, double tol = kAlgebraTol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline double matrix_min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Tensor product. The composite amplitude of index (i, j) is a[i] * b[j];
/// dims concatenate, with a's subsystems ahead of b's.
inline Ket tensor(const Ket& a, const Ket& b) {
  if (!a.is_finite() || !b.is_finite()) {
    throw std::invalid_argument("tensor: non-finite amplitudes");
  }
  std::vector<int> dims = a.dims;
  dims.insert(dims.end(), b.dims.begin(), b.dims.end());
  checked_dim_product(dims, kDenseKetCap, "tensor");
  Eigen::VectorXcd amps(a.amps.size() * b.amps.size());
  for (Eigen::Index i = 0; i < a.amps.size(); ++i) {
    amps.segment(i * b.amps.size(), b.amps.size()) = a.amps(i) * b.amps;
  }
  return Ket(std::move(dims), std::move(amps));
}

/// Outer product |a><b|: entries[i][j] = a[i] * conj(b[j]).
inline DensityMatrix outer(const Ket& a, const Ket& b) {
  if (a.dims != b.dims) {
    throw std::invalid_argument("outer: kets live on different subsystem lists");
  }
  if (!a.is_finite() || !b.is_finite()) {
    throw std::invalid_argument("outer: non-finite amplitudes");
  }
  checked_dim_product(a.dims, kDenseMatrixSideCap, "outer");
  Eigen::MatrixXcd m = a.amps * b.amps.adjoint();
  return DensityMatrix(a.dims, std::move(m));
}

/// Partial trace keeping the subsystems listed in `keep` (original order);
/// all others are summed out.
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const int n_sub = static_cast<int>(rho.dims.size());
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::vector<bool> kept(n_sub, false);
  for (int k : keep) {
    if (k < 0 || k >= n_sub) throw std::out_of_range("partial_trace: subsystem index out of range");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }

  // Row-major strides: first subsystem is most significant.
  std::vector<std::size_t> stride(n_sub, 1);
  for (int k = n_sub - 2; k >= 0; --k) {
    stride[k] = stride[k + 1] * static_cast<std::size_t>(rho.dims[k + 1]);
  }

  std::vector<int> keep_idx, traced_idx;
  for (int k = 0; k < n_sub; ++k) (kept[k] ? keep_idx : traced_idx).push_back(k);

  std::vector<int> out_dims;
  std::size_t out_side = 1;
  for (int k : keep_idx) {
    out_dims.push_back(rho.dims[k]);
    out_side *= static_cast<std::size_t>(rho.dims[k]);
  }
  std::size_t traced_size = rho.side() / out_side;

  // Enumerate multi-indices by mixed-radix counting over the kept and
  // traced subsystem lists separately.
  auto offset_table = [&](const std::vector<int>& subsystems, std::size_t count) {
    std::vector<std::size_t> offsets(count, 0);
    std::vector<int> digits(subsystems.size(), 0);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t off = 0;
      for (std::size_t k = 0; k < subsystems.size(); ++k) {
        off += static_cast<std::size_t>(digits[k]) * stride[subsystems[k]];
      }
      offsets[c] = off;
      for (int k = static_cast<int>(subsystems.size()) - 1; k >= 0; --k) {
        if (++digits[k] < rho.dims[subsystems[k]]) break;
        digits[k] = 0;
      }
    }
    return offsets;
  };

  std::vector<std::size_t> keep_off = offset_table(keep_idx, out_side);
  std::vector<std::size_t> traced_off = offset_table(traced_idx, traced_size);

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(out_side, out_side);
  for (std::size_t i = 0; i < out_side; ++i) {
    for (std::size_t j = 0; j < out_side; ++j) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < traced_size; ++t) {
        acc += rho.entries(keep_off[i] + traced_off[t], keep_off[j] + traced_off[t]);
      }
      out(i, j) = acc;
    }
  }
  return DensityMatrix(std::move(out_dims), std::move(out));
}

}  // namespace qstate
}  // namespace bellsim
