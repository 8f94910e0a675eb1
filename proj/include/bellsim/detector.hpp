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
#include <Eigen/QR>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bellsim/qstate.hpp"
#include "bellsim/rng.hpp"

namespace bellsim::detector {

enum class Station : int { left = 0, right = 1 };
enum class Port : int { v = 0, h = 1 };

/// One of the four detectors, identified by station (L/R) and polarization
/// port (V/H). The fixed array order is (LV, LH, RV, RH).
struct DetectorId {
  Station station;
  Port port;

  int index() const {
    return static_cast<int>(station) * 2 + static_cast<int>(port);
  }

  std::string label() const {
    std::string s = station == Station::left ? "L" : "R";
    s += port == Port::v ? "V" : "H";
    return s;
  }

  bool operator==(const DetectorId&) const = default;

  static const std::array<DetectorId, 4>& all() {
    static const std::array<DetectorId, 4> ids = {
        DetectorId{Station::left, Port::v}, DetectorId{Station::left, Port::h},
        DetectorId{Station::right, Port::v}, DetectorId{Station::right, Port::h}};
    return ids;
  }
};

/// Probability distribution over a detector's M internal states.
struct InternalDistribution {
  int M = 0;
  std::vector<double> weights;

  static InternalDistribution uniform(int m) {
    require_m(m);
    return InternalDistribution{m, std::vector<double>(m, 1.0 / m)};
  }

  /// Weights proportional to exp(-beta * E_mu) on the synthetic energy
  /// ladder E_mu = mu / M.
  static InternalDistribution gibbs(int m, double beta) {
    require_m(m);
    if (!(beta >= 0.0)) {
      throw std::invalid_argument("InternalDistribution::gibbs: beta must be >= 0");
    }
    std::vector<double> w(m);
    double total = 0.0;
    for (int mu = 0; mu < m; ++mu) {
      w[mu] = std::exp(-beta * static_cast<double>(mu) / m);
      total += w[mu];
    }
    for (double& x : w) x /= total;
    return InternalDistribution{m, std::move(w)};
  }

  double sum_squares() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s;
  }

 private:
  static void require_m(int m) {
    if (m < 1) throw std::invalid_argument("InternalDistribution: M must be >= 1");
  }
};

enum class DistKind { uniform, gibbs };

struct DistSpec {
  DistKind kind = DistKind::uniform;
  double beta = 0.0;

  static DistSpec uniform() { return {DistKind::uniform, 0.0}; }
  static DistSpec gibbs(double beta) { return {DistKind::gibbs, beta}; }

  InternalDistribution realize(int m) const {
    return kind == DistKind::uniform ? InternalDistribution::uniform(m)
                                     : InternalDistribution::gibbs(m, beta);
  }
};

/// Haar-random n x n unitary: QR decomposition of a complex Ginibre matrix
/// with the R diagonal's phases folded into Q.
inline Eigen::MatrixXcd haar_unitary(int n, rng::Stream& stream) {
  if (n < 1) throw std::invalid_argument("haar_unitary: n must be >= 1");
  Eigen::MatrixXcd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g(i, j) = Complex(stream.normal(), stream.normal());
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    double mag = std::abs(d);
    q.col(j) *= mag > 0.0 ? d / mag : Complex(1.0);
  }
  return q;
}

/// One detector: pointer states (0, 1), M internal states with
/// distribution p, and the unitary absorption map |mu> -> |mu'> = U|mu>.
struct DetectorModel {
  DetectorId id;
  InternalDistribution dist;
  Eigen::MatrixXcd absorption;
  std::uint64_t seed = 0;

  int dim() const { return dist.M; }

  bool absorption_is_unitary(double tol = kUnitaryTol) const {
    Eigen::MatrixXcd delta =
        absorption.adjoint() * absorption - Eigen::MatrixXcd::Identity(dim(), dim());
    return delta.cwiseAbs().maxCoeff() <= tol;
  }
};

/// Builds a detector from the experiment seed. The unitary's stream is
/// derived from (seed, detector index), so the four detectors of one
/// experiment are statistically independent.
inline DetectorModel make_detector(DetectorId id, int m, DistSpec dist,
                                   std::uint64_t experiment_seed) {
  InternalDistribution p = dist.realize(m);
  rng::Stream stream = rng::Stream::derived(experiment_seed, 0x55u, id.index());
  Eigen::MatrixXcd u = haar_unitary(m, stream);
  return DetectorModel{id, std::move(p), std::move(u), experiment_seed};
}

/// Detector with absorption = identity; its decoherence factor is exactly 1.
inline DetectorModel make_inert_detector(DetectorId id, int m, DistSpec dist) {
  InternalDistribution p = dist.realize(m);
  return DetectorModel{id, std::move(p), Eigen::MatrixXcd::Identity(m, m), 0};
}

/// Overlap <mu|mu'> between an initial internal state and its absorbed
/// image, i.e. the diagonal element U[mu][mu].
inline Complex overlap(const DetectorModel& d, int mu) {
  if (mu < 0 || mu >= d.dim()) throw std::out_of_range("overlap: mu out of range");
  return d.absorption(mu, mu);
}

/// The detector-specific decoherence factor sum_mu p(mu) <mu|mu'>. Its
/// magnitude is at most 1 and it equals 1 only for identity absorption.
inline Complex decoherence_factor(const DetectorModel& d) {
  Complex f = 0.0;
  for (int mu = 0; mu < d.dim(); ++mu) {
    f += d.dist.weights[mu] * d.absorption(mu, mu);
  }
  return f;
}

/// Draws an internal-state index according to the detector's distribution.
inline int sample_internal(const DetectorModel& d, rng::Stream& stream) {
  return stream.sample_discrete(d.dist.weights);
}

/// The standard four-detector array (LV, LH, RV, RH) for one experiment.
inline std::array<DetectorModel, 4> make_detector_array(const std::array<int, 4>& m,
                                                        DistSpec dist,
                                                        std::uint64_t experiment_seed) {
  const auto& ids = DetectorId::all();
  return {make_detector(ids[0], m[0], dist, experiment_seed),
          make_detector(ids[1], m[1], dist, experiment_seed),
          make_detector(ids[2], m[2], dist, experiment_seed),
          make_detector(ids[3], m[3], dist, experiment_seed)};
}

}  // namespace bellsim::detector
