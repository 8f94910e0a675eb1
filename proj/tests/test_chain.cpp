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

#include <catch2/catch_amalgamated.hpp>

#include "bellsim/chain.hpp"
#include "test_helpers.hpp"

using namespace bellsim;
using bellsim::testing::close;

namespace {

std::array<detector::DetectorModel, 4> haar_array(int m, std::uint64_t seed) {
  return detector::make_detector_array({m, m, m, m}, detector::DistSpec::uniform(), seed);
}

std::array<detector::DetectorModel, 4> inert_array(int m) {
  const auto& ids = detector::DetectorId::all();
  return {detector::make_inert_detector(ids[0], m, detector::DistSpec::uniform()),
          detector::make_inert_detector(ids[1], m, detector::DistSpec::uniform()),
          detector::make_inert_detector(ids[2], m, detector::DistSpec::uniform()),
          detector::make_inert_detector(ids[3], m, detector::DistSpec::uniform())};
}

}  // namespace

TEST_CASE("ready state") {
  chain::PointerConfiguration ready = chain::ready_state();
  REQUIRE(ready.bits == std::array<std::uint8_t, 4>{0, 0, 0, 0});
  REQUIRE(ready.is_ready());
  REQUIRE_FALSE(ready.is_post_absorption());
  REQUIRE(ready.to_string() == "0000");
}

TEST_CASE("tensoring the photon pair with the ready array keeps its amplitudes") {
  photon::PhotonPairState pair = photon::make_singlet();
  Eigen::VectorXcd photon_amps(4);
  for (int k = 0; k < 4; ++k) photon_amps(k) = pair.amps[k];
  qstate::Ket photon_ket({2, 2}, photon_amps);

  qstate::Ket ready = qstate::Ket::basis(2, 0);
  for (int d = 1; d < 4; ++d) ready = qstate::tensor(ready, qstate::Ket::basis(2, 0));
  qstate::Ket joint = qstate::tensor(photon_ket, ready);

  REQUIRE(joint.amps.size() == 64);
  for (int k = 0; k < 4; ++k) {
    // Photon amplitude k sits at the (0000) detector slot of its block.
    REQUIRE(joint.amps(k * 16) == photon_amps(k));
  }
  REQUIRE(std::abs(joint.amps.squaredNorm() - 1.0) <= 1e-12);
}

TEST_CASE("branches at matched settings") {
  chain::BranchSet set = chain::build_branches(0.0);
  REQUIRE(set.branches.size() == 2);
  REQUIRE(set.branches[0].config.to_string() == "1001");
  REQUIRE(set.branches[1].config.to_string() == "0110");
  REQUIRE(close(set.branches[0].amp, 1.0 / std::sqrt(2.0)));
  REQUIRE(close(set.branches[1].amp, -1.0 / std::sqrt(2.0)));
}

TEST_CASE("branches at perpendicular settings") {
  chain::BranchSet set = chain::build_branches(M_PI / 2.0);
  REQUIRE(set.branches.size() == 2);
  REQUIRE(set.branches[0].config.to_string() == "1010");
  REQUIRE(set.branches[1].config.to_string() == "0101");
  REQUIRE(close(set.branches[0].amp, 1.0 / std::sqrt(2.0)));
  REQUIRE(close(set.branches[1].amp, 1.0 / std::sqrt(2.0)));
}

TEST_CASE("branches at pi/4 split evenly across four configurations") {
  chain::BranchSet set = chain::build_branches(M_PI / 4.0);
  REQUIRE(set.branches.size() == 4);
  for (const auto& b : set.branches) {
    REQUIRE(std::norm(b.amp) == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(b.config.is_post_absorption());
  }
  REQUIRE(set.branches[0].config.to_string() == "1001");
  REQUIRE(set.branches[1].config.to_string() == "0110");
  REQUIRE(set.branches[2].config.to_string() == "1010");
  REQUIRE(set.branches[3].config.to_string() == "0101");
}

TEST_CASE("branch sets are normalized with distinct configurations") {
  rng::Stream stream(63);
  for (int rep = 0; rep < 30; ++rep) {
    double theta = (stream.uniform() - 0.5) * 10.0;
    chain::BranchSet set = chain::build_branches(theta);
    REQUIRE(set.total_weight() == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t i = 0; i < set.branches.size(); ++i) {
      REQUIRE(set.branches[i].config.is_post_absorption());
      for (std::size_t j = i + 1; j < set.branches.size(); ++j) {
        REQUIRE_FALSE(set.branches[i].config == set.branches[j].config);
      }
    }
  }
}

TEST_CASE("structured diagonal is half-half at matched settings") {
  chain::BranchSet set = chain::build_branches(0.0);
  for (std::uint64_t seed : {1ull, 77ull, 901ull}) {
    chain::ReducedDensityMatrix rho = chain::reduced_density_structured(set, haar_array(6, seed));
    REQUIRE(close(rho.entries(0, 0), 0.5));
    REQUIRE(close(rho.entries(1, 1), 0.5));
  }
}

TEST_CASE("inert detectors keep the superposition fully coherent") {
  chain::BranchSet set = chain::build_branches(0.0);
  chain::ReducedDensityMatrix rho = chain::reduced_density_structured(set, inert_array(5));
  REQUIRE(close(rho.entries(0, 1), -0.5));
  REQUIRE(close(rho.entries(1, 0), -0.5));
  REQUIRE(chain::offdiagonal_norm(rho) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("reduced matrix is Hermitian with unit trace") {
  rng::Stream stream(5150);
  for (int rep = 0; rep < 10; ++rep) {
    double theta = stream.uniform() * M_PI;
    chain::BranchSet set = chain::build_branches(theta);
    chain::ReducedDensityMatrix rho =
        chain::reduced_density_structured(set, haar_array(4, stream.next_u64()));
    REQUIRE(rho.is_hermitian(1e-12));
    REQUIRE(rho.has_unit_trace(1e-12));
    REQUIRE(rho.is_positive_semidefinite());
    // Explicit conjugate pairing of the two-branch block.
    REQUIRE(close(rho.entries(1, 0), std::conj(rho.entries(0, 1))));
  }
}

TEST_CASE("diagonals do not depend on the detector models") {
  chain::BranchSet set = chain::build_branches(M_PI / 8.0);
  chain::ReducedDensityMatrix a = chain::reduced_density_structured(set, haar_array(3, 11));
  chain::ReducedDensityMatrix b = chain::reduced_density_structured(set, haar_array(9, 2222));
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a.entries(i, i) == b.entries(i, i));
    REQUIRE(a.entries(i, i).real() ==
            Catch::Approx(std::norm(set.branches[i].amp)).margin(1e-15));
  }
}

TEST_CASE("every off-diagonal factor is attributable to one local detector") {
  chain::BranchSet set = chain::build_branches(0.0);
  std::array<detector::DetectorModel, 4> detectors = haar_array(5, 404);
  chain::ReducedDensityMatrix full = chain::reduced_density_structured(set, detectors);

  for (int d = 0; d < 4; ++d) {
    std::array<detector::DetectorModel, 4> patched = detectors;
    patched[d] = detector::make_inert_detector(detectors[d].id, detectors[d].dim(),
                                               detector::DistSpec::uniform());
    chain::ReducedDensityMatrix without =
        chain::reduced_density_structured(set, patched);
    Complex f = detector::decoherence_factor(detectors[d]);
    // Removing detector d divides its factor out of the off-diagonal:
    // f when branch A fires detector d, conj(f) when branch B does.
    Complex g = set.branches[0].config.bits[d] == 1 ? f : std::conj(f);
    REQUIRE(close(full.entries(0, 1), without.entries(0, 1) * g));
    REQUIRE(close(full.entries(1, 0), without.entries(1, 0) * std::conj(g)));
  }
}

TEST_CASE("structured path agrees with the dense oracle") {
  rng::Stream stream(8080);
  for (double theta : {0.0, M_PI / 8.0}) {
    chain::BranchSet set = chain::build_branches(theta);
    for (int m : {1, 2, 3}) {
      std::array<detector::DetectorModel, 4> detectors = haar_array(m, stream.next_u64());
      chain::ReducedDensityMatrix fast = chain::reduced_density_structured(set, detectors);
      chain::ReducedDensityMatrix dense = chain::reduced_density_dense_oracle(set, detectors);
      REQUIRE((fast.entries - dense.entries).cwiseAbs().maxCoeff() <= 1e-12);
      REQUIRE(dense.has_unit_trace(1e-12));
    }
  }
}

TEST_CASE("oracle agreement with distinct per-detector dimensions") {
  chain::BranchSet set = chain::build_branches(M_PI / 8.0);
  std::array<detector::DetectorModel, 4> detectors = detector::make_detector_array(
      {1, 2, 3, 2}, detector::DistSpec::gibbs(0.9), 31337);
  chain::ReducedDensityMatrix fast = chain::reduced_density_structured(set, detectors);
  chain::ReducedDensityMatrix dense = chain::reduced_density_dense_oracle(set, detectors);
  REQUIRE(fast.size() == 4);
  REQUIRE((fast.entries - dense.entries).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("single internal state keeps coherence up to a phase") {
  chain::BranchSet set = chain::build_branches(0.0);
  std::array<detector::DetectorModel, 4> detectors = haar_array(1, 99);
  chain::ReducedDensityMatrix rho = chain::reduced_density_structured(set, detectors);
  REQUIRE(std::abs(rho.entries(0, 1)) == Catch::Approx(0.5).margin(1e-12));
  chain::ReducedDensityMatrix dense = chain::reduced_density_dense_oracle(set, detectors);
  REQUIRE((rho.entries - dense.entries).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("detector array order is enforced") {
  chain::BranchSet set = chain::build_branches(0.0);
  std::array<detector::DetectorModel, 4> detectors = haar_array(2, 5);
  std::swap(detectors[0], detectors[1]);
  REQUIRE_THROWS_AS(chain::reduced_density_structured(set, detectors), std::invalid_argument);
}

TEST_CASE("dense oracle refuses spaces over the cap") {
  chain::BranchSet set = chain::build_branches(0.0);
  std::array<detector::DetectorModel, 4> detectors = haar_array(12, 5);
  REQUIRE_THROWS_AS(chain::reduced_density_dense_oracle(set, detectors), std::length_error);
}

TEST_CASE("off-diagonal norm basics") {
  chain::ReducedDensityMatrix diag;
  diag.configs = {chain::PointerConfiguration{{1, 0, 0, 1}},
                  chain::PointerConfiguration{{0, 1, 1, 0}}};
  diag.entries = Eigen::MatrixXcd::Zero(2, 2);
  diag.entries(0, 0) = 0.5;
  diag.entries(1, 1) = 0.5;
  REQUIRE(chain::offdiagonal_norm(diag) == 0.0);
}

TEST_CASE("median coherence at M = 8 sits in the expected decade") {
  // Four factors of typical size ~1/M and the 1/2 branch weight put the
  // median near (1/8)^4 / 2; the oracle cross-check lives at M <= 3 where
  // the dense path is feasible.
  const int n_seeds = 400;
  chain::BranchSet set = chain::build_branches(0.0);
  std::vector<double> values(n_seeds);
  for (int k = 0; k < n_seeds; ++k) {
    values[k] = chain::offdiagonal_norm(
        chain::reduced_density_structured(set, haar_array(8, rng::derive_seed(808, k))));
  }
  std::nth_element(values.begin(), values.begin() + n_seeds / 2, values.end());
  double med = values[n_seeds / 2];
  REQUIRE(med > 1e-5);
  REQUIRE(med < 1e-3);
}

TEST_CASE("large environments suppress the off-diagonals") {
  // At M = 16 the typical surviving coherence is ~(1/16)^4 / 2; values
  // above 1e-3 should be rare.
  const int n_seeds = 1000;
  chain::BranchSet set = chain::build_branches(0.0);
  int below = 0;
  for (int k = 0; k < n_seeds; ++k) {
    chain::ReducedDensityMatrix rho =
        chain::reduced_density_structured(set, haar_array(16, rng::derive_seed(616, k)));
    if (chain::offdiagonal_norm(rho) < 1e-3) ++below;
  }
  REQUIRE(below >= static_cast<int>(0.99 * n_seeds));
}
