// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "cfmimo/channel.hpp"
#include "cfmimo/combining.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Everything that is fixed for one network drop: geometry, pilots, groups,
/// powers and estimation statistics.
struct SystemState {
  ScenarioConfig config;
  NetworkRealization net;
  PilotAssignment pa;
  GroupAssignment ga;
  EstimationStats stats;
  PowerAllocation power;
  RVec p_pilot;
  double alpha = 0.8;

  int num_aps() const { return net.num_aps(); }
  int num_ues() const { return net.num_ues(); }
  int antennas() const { return config.N; }

  CombinerContext context() const { return {net, pa, stats, &ga, &power.p_ul, alpha}; }
};

/// Assembles the per-drop state. The network and pilot draws use the
/// substreams (network, drop) and (pilots, drop) of config.seed, so a drop is
/// reproducible independently of the others and of the power mode.
SystemState make_system(const ScenarioConfig& config, PowerMode mode, double exponent, std::uint64_t drop);

/// Same, for a given geometry and pilot assignment (tests, external tables).
SystemState make_system(const ScenarioConfig& config, NetworkRealization net, PilotAssignment pa,
                        const PowerAllocation& power);

}  // namespace cfmimo
