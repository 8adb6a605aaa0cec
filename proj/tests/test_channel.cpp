// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cfmimo/channel.hpp"
#include "support.hpp"

using namespace cfmimo;

TEST_SUITE("channel") {

TEST_CASE("lone UE, unit everything") {
  const auto net = network_from_beta(RMat::Constant(1, 1, 1.0), 1.0);
  const auto pa = PilotAssignment::from_indices({0}, 1);
  const auto s = estimation_stats(net, pa, RVec::Constant(1, 1.0));
  CHECK(s.c(0, 0) == doctest::Approx(0.5));
  CHECK(s.gamma(0, 0) == doctest::Approx(0.5));
  CHECK(s.theta(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("noiseless limit gives perfect estimates") {
  const auto net = network_from_beta(RMat::Constant(1, 1, 3e-9), 1e-30);
  const auto pa = PilotAssignment::from_indices({0}, 1);
  const auto s = estimation_stats(net, pa, RVec::Constant(1, 0.1));
  CHECK(s.gamma(0, 0) == doctest::Approx(3e-9).epsilon(1e-9));
}

TEST_CASE("two co-pilots with equal gains, hand computed") {
  // p = 1, tau_p = 2, beta = 1, sigma2 = 1: theta = 2 (1 + 1) + 1 = 5, gamma = 2 / 5.
  const auto net = network_from_beta(RMat::Constant(2, 1, 1.0), 1.0);
  const auto pa = PilotAssignment::from_indices({1, 1}, 2);
  const auto s = estimation_stats(net, pa, RVec::Constant(2, 1.0));
  CHECK(s.theta(1, 0) == doctest::Approx(5.0));
  CHECK(s.theta(0, 0) == doctest::Approx(1.0));
  CHECK(s.gamma(0, 0) == doctest::Approx(0.4));
  CHECK(s.gamma(1, 0) == doctest::Approx(0.4));
  CHECK(s.gamma(0, 0) < 0.5);
}

TEST_CASE("statistics identities") {
  RandomStream r(8);
  const auto net = test::random_beta_network(9, 6, r);
  RandomStream pr(9);
  const auto pa = assign_pilots_random(9, 4, pr);
  RVec pp(9);
  for (int k = 0; k < 9; ++k) pp(k) = r.uniform(0.01, 0.2);
  const auto s = estimation_stats(net, pa, pp);
  for (int k = 0; k < 9; ++k)
    for (int l = 0; l < 6; ++l) {
      CHECK(s.gamma(k, l) > 0.0);
      CHECK(s.gamma(k, l) < net.beta(k, l));
      CHECK(s.theta(pa.pilot[k], l) == doctest::Approx(s.gamma(k, l) / (s.c(k, l) * s.c(k, l))).epsilon(1e-12));
      CHECK(s.gamma(k, l) == doctest::Approx(std::sqrt(pp(k) * 4) * net.beta(k, l) * s.c(k, l)).epsilon(1e-12));
    }
}

TEST_CASE("draws: exact identities and sample moments") {
  RandomStream r(21);
  const int K = 4, L = 2, N = 3;
  const auto net = test::random_beta_network(K, L, r);
  const auto pa = PilotAssignment::from_indices({0, 1, 0, 2}, 3);
  const RVec pp = RVec::Constant(K, 0.1);
  const auto s = estimation_stats(net, pa, pp);

  const int n = 100000;
  RMat hhat2 = RMat::Zero(K, L), h2 = RMat::Zero(K, L), hb2 = RMat::Zero(3, L);
  CMat cross = CMat::Zero(K, L);
  RandomStream rng(5);
  for (int it = 0; it < n; ++it) {
    const auto ws = draw_block(net, pa, s, pp, N, rng);
    for (int l = 0; l < L; ++l) {
      for (int k = 0; k < K; ++k) {
        const CVec est = ws.hhat[l].col(k);
        if (it < 50) {
          CHECK((est - s.c(k, l) * ws.hbar[l].col(pa.pilot[k])).norm() == 0.0);
          // Co-pilot estimates are parallel with the known ratio.
          if (k == 2) {
            const double ratio = net.beta(2, l) / net.beta(0, l);
            CHECK((est - ratio * ws.hhat[l].col(0)).norm() <= 1e-12 * est.norm());
          }
        }
        h2(k, l) += ws.h[l].col(k).squaredNorm();
        hhat2(k, l) += est.squaredNorm();
        cross(k, l) += est.dot(ws.h[l].col(k) - est);
      }
      for (int i = 0; i < 3; ++i) hb2(i, l) += ws.hbar[l].col(i).squaredNorm();
    }
  }
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) {
      CHECK(hhat2(k, l) / n == doctest::Approx(N * s.gamma(k, l)).epsilon(0.02));
      CHECK(h2(k, l) / n == doctest::Approx(N * net.beta(k, l)).epsilon(0.02));
      CHECK(std::abs(cross(k, l)) / n < 0.02 * N * std::sqrt(s.gamma(k, l) * (net.beta(k, l) - s.gamma(k, l))));
    }
  for (int i = 0; i < 3; ++i)
    for (int l = 0; l < L; ++l) CHECK(hb2(i, l) / n == doctest::Approx(N * s.theta(i, l)).epsilon(0.02));
}

TEST_CASE("input validation") {
  const auto net = network_from_beta(RMat::Constant(2, 1, 1.0), 1.0);
  const auto pa = PilotAssignment::from_indices({0, 0}, 1);
  CHECK_THROWS_AS(estimation_stats(net, pa, RVec::Constant(3, 1.0)), ConfigError);
  CHECK_THROWS_AS(estimation_stats(net, pa, RVec::Zero(2)), ConfigError);
}

}
