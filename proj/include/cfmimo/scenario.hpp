// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "cfmimo/random.hpp"
#include "cfmimo/types.hpp"

namespace cfmimo {

/// Log-distance pathloss with optional log-normal shadowing, all in dB.
struct PathlossModel {
  double offset_dB = -30.5;
  double exponent = 3.67;
  double shadow_sigma_dB = 4.0;
};

struct ScenarioConfig {
  int L = 100;        ///< APs
  int N = 8;          ///< antennas per AP
  int K = 10;         ///< UEs
  int tau_p = 7;      ///< pilot length
  int tau_c = 200;    ///< coherence block length
  double area_m = 1000.0;
  double p_max_W = 0.1;
  double p_pilot_W = 0.1;
  double noise_dBm = -94.0;
  PathlossModel pathloss;
  double v_percent = 85.0;
  std::uint64_t seed = 1;
  int trials = 2000;

  /// Throws ConfigError on the first violated invariant. When zf_family is
  /// set, also requires N >= tau_p + 1.
  void validate(bool zf_family) const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct NetworkRealization {
  std::vector<Point> ap_positions;
  std::vector<Point> ue_positions;
  RMat beta;  ///< K x L, linear power gain
  double sigma2 = 0.0;

  int num_aps() const { return static_cast<int>(beta.cols()); }
  int num_ues() const { return static_cast<int>(beta.rows()); }
};

inline constexpr double kMinDistance_m = 1.0;

/// offset - 10*exponent*log10(max(d, 1 m)) + shadow_dB.
double pathloss_db(double distance_m, const PathlossModel& model, double shadow_dB = 0.0);

/// dBm to watts.
double dbm_to_watt(double dBm);

/// Places APs then UEs uniformly on the square and draws one shadowing value
/// per (k, l) in row-major (UE-major) order.
NetworkRealization generate_network(const ScenarioConfig& config, RandomStream& rng);

/// Builds a realization from explicit coefficients (tests, external tables).
NetworkRealization network_from_beta(RMat beta, double sigma2);

}  // namespace cfmimo
