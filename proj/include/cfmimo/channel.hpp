// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cfmimo/pilots.hpp"
#include "cfmimo/random.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

/// MMSE estimation statistics for one network realization.
struct EstimationStats {
  RMat c;      ///< K x L estimation scalars
  RMat gamma;  ///< K x L per-antenna estimate variances
  RMat theta;  ///< tau_p x L per-entry variance of the pilot-basis columns
};

/// c_kl = sqrt(p_k tau_p) beta_kl / theta_{i_k l},
/// gamma_kl = p_k tau_p beta_kl^2 / theta_{i_k l},
/// theta_il = tau_p sum_{t: i_t = i} p_t beta_tl + sigma^2.
EstimationStats estimation_stats(const NetworkRealization& net, const PilotAssignment& pa, const RVec& p_pilot);

/// One coherence block. Every array is stored per AP.
struct ChannelWorkspace {
  std::vector<CMat> h;     ///< [l] N x K true channels
  std::vector<CMat> hbar;  ///< [l] N x tau_p pilot-basis matrix
  std::vector<CMat> hhat;  ///< [l] N x K MMSE estimates, column k = c_kl * hbar[l].col(i_k)

  int num_aps() const { return static_cast<int>(h.size()); }
  int antennas() const { return h.empty() ? 0 : static_cast<int>(h.front().rows()); }
  int num_ues() const { return h.empty() ? 0 : static_cast<int>(h.front().cols()); }
};

/// Draws h_kl ~ CN(0, beta_kl I_N) and forms the despread pilot observation
///   hbar_l e_i = sqrt(tau_p) sum_{t: i_t = i} sqrt(p_t) h_tl + w_il,  w_il ~ CN(0, sigma^2 I_N),
/// which is Z_l phi_i / sqrt(tau_p) for an orthogonal book with phi^H phi = tau_p.
///
/// Stream order: for each AP, the K channel vectors antenna by antenna, then the
/// tau_p noise columns antenna by antenna.
ChannelWorkspace draw_block(const NetworkRealization& net, const PilotAssignment& pa, const EstimationStats& stats,
                            const RVec& p_pilot, int N, RandomStream& rng);

/// Rebuilds hhat from hbar (used after a workspace has been edited).
void refresh_estimates(ChannelWorkspace& ws, const PilotAssignment& pa, const EstimationStats& stats);

}  // namespace cfmimo
