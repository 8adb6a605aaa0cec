// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "cfmimo/system.hpp"

namespace cfmimo::test {

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Random beta table in a realistic dynamic range (-60 dB .. -20 dB relative
/// to sigma2 = 1e-3), for tests that do not need a geometry.
inline NetworkRealization random_beta_network(int K, int L, RandomStream& rng, double sigma2 = 1e-3) {
  RMat beta(K, L);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < L; ++l) beta(k, l) = sigma2 * std::pow(10.0, rng.uniform(-2.0, 2.0));
  return network_from_beta(beta, sigma2);
}

inline ScenarioConfig small_config(int L, int N, int K, int tau_p, std::uint64_t seed = 11) {
  ScenarioConfig c;
  c.L = L;
  c.N = N;
  c.K = K;
  c.tau_p = tau_p;
  c.seed = seed;
  return c;
}

}  // namespace cfmimo::test
