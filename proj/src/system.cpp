// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/system.hpp"

namespace cfmimo {

SystemState make_system(const ScenarioConfig& config, PowerMode mode, double exponent, std::uint64_t drop) {
  RandomStream net_rng(config.seed, {static_cast<std::uint64_t>(StreamPurpose::network), drop});
  NetworkRealization net = generate_network(config, net_rng);
  RandomStream pilot_rng(config.seed, {static_cast<std::uint64_t>(StreamPurpose::pilots), drop});
  PilotAssignment pa = assign_pilots_random(config.K, config.tau_p, pilot_rng);
  const PowerAllocation power =
      mode == PowerMode::full ? full_power(config.K, config.p_max_W) : fractional_power(net, config.p_max_W, exponent);
  return make_system(config, std::move(net), std::move(pa), power);
}

SystemState make_system(const ScenarioConfig& config, NetworkRealization net, PilotAssignment pa,
                        const PowerAllocation& power) {
  SystemState s;
  s.config = config;
  s.p_pilot = RVec::Constant(net.num_ues(), config.p_pilot_W);
  s.stats = estimation_stats(net, pa, s.p_pilot);
  s.ga = group_ues(net, pa, config.v_percent, config.N);
  s.net = std::move(net);
  s.pa = std::move(pa);
  s.power = power;
  return s;
}

}  // namespace cfmimo
