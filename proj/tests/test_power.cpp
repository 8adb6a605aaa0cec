// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "cfmimo/power.hpp"
#include "support.hpp"

using namespace cfmimo;

TEST_SUITE("power") {

TEST_CASE("full power") {
  const auto p = full_power(3, 0.1);
  CHECK(p.p_ul.size() == 3);
  CHECK((p.p_ul.array() == 0.1).all());
  CHECK(p.mode == PowerMode::full);
}

TEST_CASE("fractional power rule") {
  RMat beta(2, 2);
  beta << 1.0, 1.0, 0.5, 0.5;  // aggregate 2 and 1
  const auto p = fractional_power(network_from_beta(beta, 1e-3), 0.1);
  CHECK(p.p_ul(0) == doctest::Approx(0.05));
  CHECK(p.p_ul(1) == doctest::Approx(0.1));

  RMat equal = RMat::Constant(3, 4, 2e-9);
  CHECK((fractional_power(network_from_beta(equal, 1e-3), 0.1).p_ul.array() == 0.1).all());
}

TEST_CASE("fractional power properties") {
  RandomStream r(4);
  const auto net = test::random_beta_network(12, 9, r);
  const auto p = fractional_power(net, 0.2);
  CHECK(p.p_ul.maxCoeff() == doctest::Approx(0.2));
  CHECK((p.p_ul.array() > 0.0).all());
  const RVec agg = net.beta.rowwise().sum();
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      if (agg(i) < agg(j)) CHECK(p.p_ul(i) > p.p_ul(j));
  // Invariant to a common scaling of beta.
  auto scaled = net;
  scaled.beta *= 37.0;
  const auto q = fractional_power(scaled, 0.2);
  for (int k = 0; k < 12; ++k) CHECK(q.p_ul(k) == doctest::Approx(p.p_ul(k)).epsilon(1e-12));
}

TEST_CASE("mode names round-trip") {
  CHECK(parse_power_mode(to_string(PowerMode::fractional)) == PowerMode::fractional);
  CHECK(parse_power_mode("full") == PowerMode::full);
  CHECK_THROWS_AS(parse_power_mode("max"), ConfigError);
}

}
