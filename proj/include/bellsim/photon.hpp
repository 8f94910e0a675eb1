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
#include <stdexcept>
#include <string>

#include "bellsim/qstate.hpp"

namespace bellsim::photon {

/// Polarizer orientation. Polarization bases are pi-periodic, so theta is
/// canonicalized into [0, pi).
struct MeasurementSetting {
  double theta = 0.0;
  std::string label;

  static MeasurementSetting make(double theta, std::string label = {}) {
    if (!std::isfinite(theta)) {
      throw std::invalid_argument("MeasurementSetting: theta must be finite");
    }
    double t = std::fmod(theta, M_PI);
    if (t < 0.0) t += M_PI;
    return MeasurementSetting{t, std::move(label)};
  }
};

/// Two-photon polarization state. Amplitude order:
///   (V_L V_R, V_L H_R, H_L V_R, H_L H_R).
/// After expand_in_settings the right-hand factor is read in the rotated
/// (V', H') basis, same ordering.
struct PhotonPairState {
  std::array<Complex, 4> amps{};

  double squared_norm() const {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
  }
  bool is_normalized(double tol = kAlgebraTol) const {
    return std::abs(squared_norm() - 1.0) <= tol;
  }
};

/// The singlet pair (|V>_L |H>_R - |H>_L |V>_R) / sqrt(2).
inline PhotonPairState make_singlet() {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  return PhotonPairState{{Complex(0.0), Complex(inv_sqrt2), Complex(-inv_sqrt2), Complex(0.0)}};
}

/// Rotation taking (V, H) to (V', H'):
///   |V'> = cos(theta) |V> + sin(theta) |H>
///   |H'> = -sin(theta) |V> + cos(theta) |H>
/// Row k holds the (V, H) components of the k-th primed vector.
inline Eigen::Matrix2d basis_rotation(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("basis_rotation: theta must be finite");
  }
  Eigen::Matrix2d r;
  r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
  return r;
}

/// Re-expresses the state with the left factor rotated by theta_left and
/// the right factor rotated by theta_right. Amplitude layout as a 2x2
/// block A[i][j] (i = left V/H, j = right V/H) transforms as B_L A B_R^T.
inline PhotonPairState apply_station_rotations(const PhotonPairState& state,
                                               double theta_left,
                                               double theta_right) {
  Eigen::Matrix2d bl = basis_rotation(theta_left);
  Eigen::Matrix2d br = basis_rotation(theta_right);
  Eigen::Matrix2cd a;
  a << state.amps[0], state.amps[1], state.amps[2], state.amps[3];
  Eigen::Matrix2cd out = bl.cast<Complex>() * a * br.transpose().cast<Complex>();
  return PhotonPairState{{out(0, 0), out(0, 1), out(1, 0), out(1, 1)}};
}

/// Expands the state in Alice's (V, H) basis and Bob's basis rotated by
/// theta_rel. For the singlet the result is
///   (sin/sqrt2, cos/sqrt2, -cos/sqrt2, sin/sqrt2).
inline PhotonPairState expand_in_settings(const PhotonPairState& state, double theta_rel) {
  if (!state.is_normalized(1e-9)) {
    throw std::invalid_argument("expand_in_settings: state not normalized");
  }
  return apply_station_rotations(state, 0.0, theta_rel);
}

}  // namespace bellsim::photon
