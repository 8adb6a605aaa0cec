// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/power.hpp"

#include <cmath>
#include <string>

namespace cfmimo {

std::string_view to_string(PowerMode mode) {
  return mode == PowerMode::full ? "full" : "fractional";
}

PowerMode parse_power_mode(std::string_view name) {
  if (name == "full") return PowerMode::full;
  if (name == "fractional") return PowerMode::fractional;
  throw ConfigError("power_mode", "unknown mode '" + std::string(name) + "'");
}

PowerAllocation full_power(int K, double p_max) {
  if (!(p_max > 0.0)) throw ConfigError("p_max_W", "must be > 0");
  return {RVec::Constant(K, p_max), PowerMode::full};
}

PowerAllocation fractional_power(const NetworkRealization& net, double p_max, double exponent) {
  if (!(p_max > 0.0)) throw ConfigError("p_max_W", "must be > 0");
  const RVec aggregate = net.beta.rowwise().sum();
  if ((aggregate.array() <= 0.0).any()) throw ConfigError("beta", "aggregate gains must be positive");
  const double weakest = aggregate.minCoeff();
  PowerAllocation out{RVec(aggregate.size()), PowerMode::fractional};
  for (Eigen::Index k = 0; k < aggregate.size(); ++k)
    out.p_ul(k) = p_max * std::pow(weakest / aggregate(k), exponent);
  return out;
}

}  // namespace cfmimo
