// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace cfmimo {

void ScenarioConfig::validate(bool zf_family) const {
  if (L < 1) throw ConfigError("L", "must be >= 1");
  if (K < 1) throw ConfigError("K", "must be >= 1");
  if (N < 1) throw ConfigError("N", "must be >= 1");
  if (tau_p < 1) throw ConfigError("tau_p", "must be >= 1");
  if (tau_p > tau_c) throw ConfigError("tau_p", "must not exceed tau_c");
  if (zf_family && N < tau_p + 1)
    throw ConfigError("N", "zero-forcing schemes need N >= tau_p + 1");
  if (!(p_max_W > 0.0)) throw ConfigError("p_max_W", "must be > 0");
  if (!(p_pilot_W > 0.0)) throw ConfigError("p_pilot_W", "must be > 0");
  if (!(area_m > 0.0)) throw ConfigError("area_m", "must be > 0");
  if (!(v_percent > 0.0 && v_percent <= 100.0)) throw ConfigError("v_percent", "must lie in (0, 100]");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (pathloss.shadow_sigma_dB < 0.0) throw ConfigError("pathloss.shadow_sigma_dB", "must be >= 0");
}

double pathloss_db(double distance_m, const PathlossModel& model, double shadow_dB) {
  const double d = std::max(distance_m, kMinDistance_m);
  return model.offset_dB - 10.0 * model.exponent * std::log10(d) + shadow_dB;
}

double dbm_to_watt(double dBm) { return std::pow(10.0, (dBm - 30.0) / 10.0); }

NetworkRealization generate_network(const ScenarioConfig& config, RandomStream& rng) {
  NetworkRealization net;
  net.ap_positions.resize(config.L);
  net.ue_positions.resize(config.K);
  for (auto& p : net.ap_positions) {
    p.x = rng.uniform(0.0, config.area_m);
    p.y = rng.uniform(0.0, config.area_m);
  }
  for (auto& p : net.ue_positions) {
    p.x = rng.uniform(0.0, config.area_m);
    p.y = rng.uniform(0.0, config.area_m);
  }
  net.beta.resize(config.K, config.L);
  const double sigma_sf = config.pathloss.shadow_sigma_dB;
  for (int k = 0; k < config.K; ++k) {
    for (int l = 0; l < config.L; ++l) {
      const double dx = net.ue_positions[k].x - net.ap_positions[l].x;
      const double dy = net.ue_positions[k].y - net.ap_positions[l].y;
      const double shadow = sigma_sf > 0.0 ? sigma_sf * rng.normal() : 0.0;
      net.beta(k, l) = std::pow(10.0, pathloss_db(std::hypot(dx, dy), config.pathloss, shadow) / 10.0);
    }
  }
  net.sigma2 = dbm_to_watt(config.noise_dBm);
  return net;
}

NetworkRealization network_from_beta(RMat beta, double sigma2) {
  NetworkRealization net;
  net.ap_positions.resize(beta.cols());
  net.ue_positions.resize(beta.rows());
  net.beta = std::move(beta);
  net.sigma2 = sigma2;
  return net;
}

}  // namespace cfmimo
