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

#include "bellsim/detector.hpp"
#include "test_helpers.hpp"

using namespace bellsim;
using bellsim::testing::close;

namespace {
const detector::DetectorId kLv{detector::Station::left, detector::Port::v};
}

TEST_CASE("internal distributions") {
  detector::InternalDistribution uniform = detector::InternalDistribution::uniform(4);
  for (double w : uniform.weights) REQUIRE(w == Catch::Approx(0.25).margin(1e-15));

  detector::InternalDistribution gibbs0 = detector::InternalDistribution::gibbs(2, 0.0);
  REQUIRE(gibbs0.weights[0] == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(gibbs0.weights[1] == Catch::Approx(0.5).margin(1e-15));

  // Large beta freezes the ground state.
  detector::InternalDistribution cold = detector::InternalDistribution::gibbs(2, 500.0);
  REQUIRE(cold.weights[0] == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(cold.weights[1] == Catch::Approx(0.0).margin(1e-12));

  double total = 0.0;
  detector::InternalDistribution g = detector::InternalDistribution::gibbs(7, 1.3);
  for (double w : g.weights) total += w;
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));

  REQUIRE_THROWS_AS(detector::InternalDistribution::uniform(0), std::invalid_argument);
  REQUIRE_THROWS_AS(detector::InternalDistribution::gibbs(4, -1.0), std::invalid_argument);
}

TEST_CASE("absorption unitaries are unitary and seed-deterministic") {
  for (int m : {1, 2, 3, 8, 16}) {
    detector::DetectorModel d =
        detector::make_detector(kLv, m, detector::DistSpec::uniform(), 42);
    REQUIRE(d.absorption_is_unitary());
  }

  detector::DetectorModel a =
      detector::make_detector(kLv, 6, detector::DistSpec::uniform(), 7);
  detector::DetectorModel b =
      detector::make_detector(kLv, 6, detector::DistSpec::uniform(), 7);
  REQUIRE((a.absorption - b.absorption).cwiseAbs().maxCoeff() == 0.0);

  // A different detector id on the same experiment seed gets its own unitary.
  detector::DetectorModel other = detector::make_detector(
      detector::DetectorId{detector::Station::right, detector::Port::h}, 6,
      detector::DistSpec::uniform(), 7);
  REQUIRE((a.absorption - other.absorption).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("decoherence factor of inert and single-state detectors") {
  detector::DetectorModel inert =
      detector::make_inert_detector(kLv, 5, detector::DistSpec::uniform());
  REQUIRE(close(detector::decoherence_factor(inert), 1.0));

  // M = 1: the unitary is a bare phase, so |f| = 1 regardless of seed.
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    detector::DetectorModel d =
        detector::make_detector(kLv, 1, detector::DistSpec::uniform(), seed);
    REQUIRE(std::abs(detector::decoherence_factor(d)) == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("decoherence factor magnitude is bounded by 1") {
  rng::Stream seeds(99);
  for (int rep = 0; rep < 50; ++rep) {
    int m = 1 + static_cast<int>(seeds.next_u64() % 12);
    detector::DistSpec dist = rep % 2 == 0 ? detector::DistSpec::uniform()
                                           : detector::DistSpec::gibbs(0.7);
    detector::DetectorModel d = detector::make_detector(kLv, m, dist, seeds.next_u64());
    REQUIRE(std::abs(detector::decoherence_factor(d)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("decoherence factor is 1 only for identity absorption") {
  // A diagonal phase twist already breaks f = 1.
  detector::DetectorModel d =
      detector::make_inert_detector(kLv, 3, detector::DistSpec::uniform());
  d.absorption(2, 2) = std::exp(Complex(0.0, 1e-3));
  REQUIRE(std::abs(detector::decoherence_factor(d) - Complex(1.0)) > 1e-12);

  // Haar draws on M >= 2 never sit at the identity.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    detector::DetectorModel h =
        detector::make_detector(kLv, 4, detector::DistSpec::uniform(), seed);
    REQUIRE(std::abs(detector::decoherence_factor(h) - Complex(1.0)) > 1e-9);
  }
}

TEST_CASE("Haar suppression law E|f|^2 = 1/M^2 for uniform weights") {
  for (int m : {2, 8}) {
    double sum = 0.0;
    const int n_samples = 4000;
    for (int k = 0; k < n_samples; ++k) {
      detector::DetectorModel d = detector::make_detector(
          kLv, m, detector::DistSpec::uniform(), rng::derive_seed(555, m, k));
      sum += std::norm(detector::decoherence_factor(d));
    }
    double mean = sum / n_samples;
    double expected = 1.0 / (static_cast<double>(m) * m);
    REQUIRE(std::abs(mean - expected) <= 0.10 * expected);
  }
}

TEST_CASE("Haar suppression law E|f|^2 = sum(p^2)/M for a gibbs distribution") {
  const int m = 8;
  detector::DistSpec dist = detector::DistSpec::gibbs(2.0);
  double sum_sq = dist.realize(m).sum_squares();
  double expected = sum_sq / m;

  double sum = 0.0;
  const int n_samples = 4000;
  for (int k = 0; k < n_samples; ++k) {
    detector::DetectorModel d =
        detector::make_detector(kLv, m, dist, rng::derive_seed(777, k));
    sum += std::norm(detector::decoherence_factor(d));
  }
  double mean = sum / n_samples;
  REQUIRE(std::abs(mean - expected) <= 0.10 * expected);
}

TEST_CASE("internal sampling follows the weights") {
  detector::DetectorModel d =
      detector::make_detector(kLv, 4, detector::DistSpec::uniform(), 31);
  rng::Stream stream(1234);
  const long n = 100000;
  std::array<long, 4> counts{};
  for (long i = 0; i < n; ++i) counts[detector::sample_internal(d, stream)] += 1;
  double sigma = std::sqrt(0.25 * 0.75 / n);
  for (long c : counts) {
    REQUIRE(std::abs(static_cast<double>(c) / n - 0.25) <= 3.0 * sigma);
  }

  // Deep in the gibbs tail only the ground state appears.
  detector::DetectorModel cold =
      detector::make_detector(kLv, 4, detector::DistSpec::gibbs(500.0), 31);
  for (long i = 0; i < 1000; ++i) REQUIRE(detector::sample_internal(cold, stream) == 0);
}

TEST_CASE("sampling is reproducible for a fixed seed") {
  detector::DetectorModel d =
      detector::make_detector(kLv, 5, detector::DistSpec::gibbs(0.4), 12);
  std::vector<int> first, second;
  {
    rng::Stream stream = rng::Stream::derived(900, 1);
    for (int i = 0; i < 200; ++i) first.push_back(detector::sample_internal(d, stream));
  }
  {
    rng::Stream stream = rng::Stream::derived(900, 1);
    for (int i = 0; i < 200; ++i) second.push_back(detector::sample_internal(d, stream));
  }
  REQUIRE(first == second);
}

TEST_CASE("overlap is the unitary's diagonal") {
  detector::DetectorModel inert =
      detector::make_inert_detector(kLv, 4, detector::DistSpec::uniform());
  for (int mu = 0; mu < 4; ++mu) REQUIRE(close(detector::overlap(inert, mu), 1.0));

  detector::DetectorModel d =
      detector::make_detector(kLv, 6, detector::DistSpec::uniform(), 5);
  for (int mu = 0; mu < 6; ++mu) {
    REQUIRE(close(detector::overlap(d, mu), d.absorption(mu, mu)));
    REQUIRE(std::abs(detector::overlap(d, mu)) <= 1.0 + 1e-12);
  }
  REQUIRE_THROWS_AS(detector::overlap(d, 6), std::out_of_range);
  REQUIRE_THROWS_AS(detector::overlap(d, -1), std::out_of_range);
}

TEST_CASE("Haar diagonal magnitudes match Rayleigh statistics") {
  // For Haar matrices the diagonal entries are asymptotically complex
  // Gaussian with E|U_mumu|^2 = 1/M, so E|U_mumu| ~ sqrt(pi / (4 M)).
  const int m = 16;
  const int n_matrices = 4000;
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n_matrices; ++k) {
    detector::DetectorModel d = detector::make_detector(
        kLv, m, detector::DistSpec::uniform(), rng::derive_seed(321, k));
    for (int mu = 0; mu < m; ++mu) {
      double a = std::abs(d.absorption(mu, mu));
      sum_abs += a;
      sum_sq += a * a;
    }
  }
  double n_samples = static_cast<double>(n_matrices) * m;
  double mean_abs = sum_abs / n_samples;
  double mean_sq = sum_sq / n_samples;
  REQUIRE(std::abs(mean_abs - std::sqrt(M_PI / (4.0 * m))) <=
          0.02 * std::sqrt(M_PI / (4.0 * m)));
  REQUIRE(std::abs(mean_sq - 1.0 / m) <= 0.05 / m);
}
