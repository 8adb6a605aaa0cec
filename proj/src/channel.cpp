// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/channel.hpp"

#include <cmath>

namespace cfmimo {

EstimationStats estimation_stats(const NetworkRealization& net, const PilotAssignment& pa, const RVec& p_pilot) {
  const int K = net.num_ues();
  const int L = net.num_aps();
  const int tau_p = pa.tau_p;
  if (pa.num_ues() != K) throw ConfigError("pilots", "assignment size must equal K");
  if (p_pilot.size() != K) throw ConfigError("p_pilot", "size must equal K");
  if ((p_pilot.array() <= 0.0).any()) throw ConfigError("p_pilot", "powers must be > 0");

  EstimationStats s;
  s.theta = RMat::Constant(tau_p, L, net.sigma2);
  for (int l = 0; l < L; ++l)
    for (int t = 0; t < K; ++t) s.theta(pa.pilot[t], l) += tau_p * p_pilot(t) * net.beta(t, l);

  s.c.resize(K, L);
  s.gamma.resize(K, L);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      const double th = s.theta(pa.pilot[k], l);
      s.c(k, l) = std::sqrt(p_pilot(k) * tau_p) * net.beta(k, l) / th;
      s.gamma(k, l) = p_pilot(k) * tau_p * net.beta(k, l) * net.beta(k, l) / th;
    }
  }
  return s;
}

ChannelWorkspace draw_block(const NetworkRealization& net, const PilotAssignment& pa, const EstimationStats& stats,
                            const RVec& p_pilot, int N, RandomStream& rng) {
  const int K = net.num_ues();
  const int L = net.num_aps();
  const int tau_p = pa.tau_p;
  const double sqrt_tau = std::sqrt(static_cast<double>(tau_p));

  ChannelWorkspace ws;
  ws.h.resize(L);
  ws.hbar.resize(L);
  ws.hhat.resize(L);
  for (int l = 0; l < L; ++l) {
    CMat& h = ws.h[l];
    h.resize(N, K);
    for (int k = 0; k < K; ++k) {
      const double beta = net.beta(k, l);
      for (int n = 0; n < N; ++n) h(n, k) = rng.complex_normal(beta);
    }
    CMat& hb = ws.hbar[l];
    hb.resize(N, tau_p);
    for (int i = 0; i < tau_p; ++i)
      for (int n = 0; n < N; ++n) hb(n, i) = rng.complex_normal(net.sigma2);
    for (int k = 0; k < K; ++k) hb.col(pa.pilot[k]) += (sqrt_tau * std::sqrt(p_pilot(k))) * h.col(k);
  }
  refresh_estimates(ws, pa, stats);
  return ws;
}

void refresh_estimates(ChannelWorkspace& ws, const PilotAssignment& pa, const EstimationStats& stats) {
  for (int l = 0; l < ws.num_aps(); ++l) {
    const CMat& hb = ws.hbar[l];
    CMat& est = ws.hhat[l];
    est.resize(hb.rows(), pa.num_ues());
    for (int k = 0; k < pa.num_ues(); ++k) est.col(k) = stats.c(k, l) * hb.col(pa.pilot[k]);
  }
}

}  // namespace cfmimo
