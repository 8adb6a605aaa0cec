// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cfmimo/combining.hpp"
#include "cfmimo/lsfd.hpp"
#include "cfmimo/system.hpp"

namespace cfmimo {

struct ClosedFormInputs {
  const NetworkRealization& net;
  const EstimationStats& stats;
  const PilotAssignment& pa;
  const GroupAssignment& ga;
  const RVec& powers;
  int N = 0;
  int tau_c = 200;
};

inline ClosedFormInputs closed_form_inputs(const SystemState& sys, const RVec& powers) {
  return {sys.net, sys.stats, sys.pa, sys.ga, powers, sys.antennas(), sys.config.tau_c};
}

/// The pieces of a UE's effective-SINR expression for real LSFD weights a:
///   SINR(a) = p_k (a^T b)^2 / (sum_j p_{t_j} (a^T d_j)^2 + sum_l a_l^2 diag_l),
/// where t_j runs over the co-pilot UEs of k other than k.
struct ClosedFormTerms {
  RVec b;
  std::vector<int> copilots;
  std::vector<RVec> d;
  RVec diag;
};

struct ClosedFormResult {
  RVec a;
  double sinr = 0.0;
  double se = 0.0;
};

/// Per-AP terms of FZF, PFZF or PWPFZF for UE k.
ClosedFormTerms zf_family_terms(Scheme scheme, const ClosedFormInputs& in, int k);

/// C = sum_j p_{t_j} d_j d_j^T + diag.
RMat closed_form_matrix(const ClosedFormTerms& terms, const RVec& powers);

double closed_form_sinr_at(const ClosedFormTerms& terms, const RVec& powers, int k, const RVec& a);

/// a = C^{-1} b, SINR = p_k b^T C^{-1} b.
ClosedFormResult solve_closed_form(const ClosedFormTerms& terms, const RVec& powers, int k, double prelog);

ClosedFormResult fzf_se_closed(const ClosedFormInputs& in, int k);
ClosedFormResult pfzf_se_closed(const ClosedFormInputs& in, int k);
ClosedFormResult pwpfzf_se_closed(const ClosedFormInputs& in, int k);

/// Deterministic-equivalent state of one AP. Everything is in noise-normalized
/// units: theta here is theta_il / sigma^2.
struct FixedPointState {
  RVec theta;    ///< tau_p
  RVec e;        ///< tau_p
  double T = 0.0;
  double T_prime = 0.0;  ///< derivative of T with respect to -alpha
  RVec e_prime;          ///< tau_p, theta_i T'
  RMat e_cross;          ///< tau_p x tau_p, theta_i theta_j T'
  RMat J;                ///< tau_p x tau_p iteration Jacobian of the derivative system
  double alpha = 0.0;
  int N = 0;
  int iterations = 0;
  double residual = 0.0;
};

/// Solves e_i = theta_i T, T = (N^{-1} sum_j theta_j / (1 + e_j) + alpha)^{-1}
/// by fixed-point iteration from e = 1/alpha, then the linear systems for e'.
FixedPointState mlrzf_fixed_point(const RVec& theta, int N, double alpha, double tol = 1e-9, int max_iter = 500);

/// Fixed points of every AP for a drop.
std::vector<FixedPointState> mlrzf_fixed_points(const EstimationStats& stats, double sigma2, int N, double alpha);

double spectral_radius(const RMat& m);

/// Deterministic-equivalent terms of the mLRZF SINR of UE k. The estimation
/// error leakage is summed over UEs on other pilots only; copilot_error adds the
/// same leakage for k and its co-pilots (an O(1/N) refinement).
ClosedFormTerms mlrzf_terms(const std::vector<FixedPointState>& fp, const ClosedFormInputs& in, int k,
                            bool copilot_error = false);

ClosedFormResult mlrzf_asymptotic_se(const std::vector<FixedPointState>& fp, const ClosedFormInputs& in, int k,
                                     bool copilot_error = false);

/// Closed-form or asymptotic report for every UE of the drop.
SEReport closed_form_report(Scheme scheme, const SystemState& sys, const RVec& powers, PowerMode mode);

}  // namespace cfmimo
