// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "cfmimo/scenario.hpp"

namespace cfmimo {

enum class PowerMode { full, fractional };

std::string_view to_string(PowerMode mode);
PowerMode parse_power_mode(std::string_view name);

struct PowerAllocation {
  RVec p_ul;
  PowerMode mode = PowerMode::full;
};

PowerAllocation full_power(int K, double p_max);

/// p_k = p_max * (min_j B_j / B_k)^exponent with B_k = sum_l beta_kl, so the
/// UE with the weakest aggregate gain transmits at p_max.
PowerAllocation fractional_power(const NetworkRealization& net, double p_max, double exponent = 1.0);

}  // namespace cfmimo
