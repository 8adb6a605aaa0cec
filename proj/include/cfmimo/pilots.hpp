// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cfmimo/random.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// Pilot indices are 0-based internally: pilot[k] in [0, tau_p).
struct PilotAssignment {
  int tau_p = 0;
  std::vector<int> pilot;
  std::vector<std::vector<int>> copilots;  ///< P_k, sorted, includes k

  static PilotAssignment from_indices(std::vector<int> pilot, int tau_p);

  int num_ues() const { return static_cast<int>(pilot.size()); }
  bool share_pilot(int k, int t) const { return pilot[k] == pilot[t]; }
  /// UEs on pilot i, ascending.
  std::vector<int> users_of(int i) const;
};

/// Per-AP strong/weak partition.
struct GroupAssignment {
  std::vector<std::vector<int>> strong;         ///< S_l, ascending UE index
  std::vector<std::vector<int>> weak;           ///< W_l, ascending UE index
  std::vector<int> tau_s;                       ///< distinct pilots in S_l
  std::vector<std::vector<int>> strong_pilots;  ///< R_Sl, ascending pilot index
  std::vector<std::vector<int>> strong_aps;     ///< Z_k
  std::vector<std::vector<int>> weak_aps;       ///< M_k
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> is_strong;  ///< K x L

  /// Fills every derived field from a K x L strong mask. The mask must already
  /// be closed under co-pilot sets.
  static GroupAssignment from_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                   const PilotAssignment& pa);
  static GroupAssignment all_strong(const PilotAssignment& pa, int L);
  static GroupAssignment all_weak(const PilotAssignment& pa, int L);

  int num_aps() const { return static_cast<int>(strong.size()); }
  /// Column of pilot i inside the strong basis of AP l, or -1.
  int local_index(int pilot, int l) const;
};

/// Random pilot assignment. With K <= tau_p the pilots form a random injection;
/// otherwise a random subset of tau_p UEs gets distinct pilots and the rest draw
/// uniformly, so every pilot is in use.
PilotAssignment assign_pilots_random(int K, int tau_p, RandomStream& rng);

/// Strong/weak grouping by the v% rule.
///
/// Per AP the UEs are ordered by decreasing beta (ties: lower index first) and
/// the shortest prefix whose gain reaches v% of the AP's total is taken. The
/// prefix is then closed under co-pilot sets. If that leaves tau_S >= N, whole
/// pilot clusters are demoted to the weak set, smallest summed beta first
/// (ties: higher pilot index first), until tau_S <= N - 1.
GroupAssignment group_ues(const NetworkRealization& net, const PilotAssignment& pa, double v_percent, int N);

}  // namespace cfmimo
