// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/pilots.hpp"

namespace cfmimo {

enum class Scheme { MR, FZF, PFZF, PWPFZF, LRZF, mLRZF };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);
/// Schemes whose local vectors null pilot directions (need N >= tau + 1).
bool is_zf_family(Scheme s);
/// Schemes with an exact closed-form SE.
bool has_closed_form(Scheme s);

/// Per-AP, per-UE local combining vectors: v[l].col(k) = v_kl.
struct CombinerSet {
  Scheme scheme = Scheme::MR;
  std::vector<CMat> v;
};

/// A basis matrix whose Gram condition (after column equilibration) exceeds
/// this is rejected.
inline constexpr double kMaxGramCondition = 1e12;

/// QR view of the selected pilot columns hbar_l E of one AP. Column scaling
/// is applied before factorizing, so the result is insensitive to the large
/// power spread between pilot columns.
class PilotSubspace {
public:
  PilotSubspace(const CMat& hbar, const std::vector<int>& pilots, int ap);

  int rank() const { return static_cast<int>(q_.cols()); }
  /// Column j of hbar E (E^H hbar^H hbar E)^{-1}.
  CVec dual_column(int j) const { return dual_.col(j); }
  const CMat& dual() const { return dual_; }
  /// (I - P) x, P the orthogonal projector onto span(hbar E).
  CVec project_out(const CVec& x) const;
  /// Materialized N x N complement projector (tests and diagnostics only).
  CMat complement_projector() const;

private:
  CMat q_;     // N x tau, orthonormal basis of span(hbar E)
  CMat dual_;  // N x tau
};

CombinerSet mr_combiner(const ChannelWorkspace& ws);

/// v_kl = c_kl theta_{i_k l} hbar_l (hbar_l^H hbar_l)^{-1} e_{i_k}. Needs N >= tau_p + 1.
CombinerSet fzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa);

/// Strong UEs: nulling restricted to the strong pilots of the AP. Weak UEs: MR.
CombinerSet pfzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                          const GroupAssignment& ga);

/// As pfzf_combiner, but weak UEs use MR projected onto the orthogonal
/// complement of the strong pilot subspace: v_kl = B_l hhat_kl.
CombinerSet pwpfzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                            const GroupAssignment& ga);

/// Regularizer of the local RZF combiner at AP l: sigma^2 + sum_t p_t (beta_tl - gamma_tl).
double lrzf_regularizer(const NetworkRealization& net, const EstimationStats& stats, const RVec& powers, int l);

/// Local regularized ZF in the reduced tau_p-dimensional form
///   V_l = hbar_l (F_l hbar_l^H hbar_l + lambda_l I)^{-1} [p_1 c_1l e_{i_1}, ..., p_K c_Kl e_{i_K}],
/// F_l = sum_t p_t c_tl^2 e_{i_t} e_{i_t}^H, lambda_l = lrzf_regularizer().
CombinerSet lrzf_combiner(const ChannelWorkspace& ws, const NetworkRealization& net, const EstimationStats& stats,
                          const PilotAssignment& pa, const RVec& powers);

/// Direct N-dimensional LRZF, (Hhat P Hhat^H + lambda I)^{-1} Hhat P. Reference path for tests.
CombinerSet lrzf_combiner_direct(const ChannelWorkspace& ws, const NetworkRealization& net,
                                 const EstimationStats& stats, const RVec& powers);

/// Modified LRZF, v_kl = c_kl (hbar hbar^H + N alpha sigma^2 I)^{-1} hbar e_{i_k}.
/// alpha is expressed relative to the noise power.
CombinerSet mlrzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                           double sigma2, double alpha);

/// Everything a scheme may need besides the workspace.
struct CombinerContext {
  const NetworkRealization& net;
  const PilotAssignment& pa;
  const EstimationStats& stats;
  const GroupAssignment* ga = nullptr;
  const RVec* powers = nullptr;
  double alpha = 0.8;
};

CombinerSet build_combiners(Scheme scheme, const CombinerContext& ctx, const ChannelWorkspace& ws);

}  // namespace cfmimo
