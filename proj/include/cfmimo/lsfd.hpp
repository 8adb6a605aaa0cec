// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cfmimo/combining.hpp"
#include "cfmimo/power.hpp"
#include "cfmimo/system.hpp"

namespace cfmimo {

/// How the L x L second moments E{g_kt g_kt^H} are estimated.
///
/// factored: the combiners are local, so g_ktl and g_ktl' are independent for
///   l != l'. Only the per-AP moments E{g_ktl} and E{|g_ktl|^2} are sampled and
///   the matrix is assembled as m m^H + diag(E|g|^2 - |m|^2). Storage O(K^2 L).
/// empirical: the sample average of g g^H itself, streamed as
///   sum_t p_t g_kt g_kt^H (storage O(K L^2)), optionally also per (k, t).
enum class MomentEstimator { factored, empirical };

/// Monte-Carlo statistics of the effective gains g_kt[l] = v_kl^H h_tl.
struct GMoments {
  Scheme scheme = Scheme::MR;
  MomentEstimator estimator = MomentEstimator::factored;
  long trials_used = 0;
  CMat mean_g;      ///< K x L, E{g_kk}
  RMat noise_diag;  ///< K x L, E{||v_kl||^2}

  // factored
  std::vector<CMat> cross_mean;   ///< [l] K x K, (k, t) -> E{g_ktl}
  std::vector<RMat> cross_power;  ///< [l] K x K, (k, t) -> E{|g_ktl|^2}

  // empirical
  RVec accumulated_powers;                ///< powers baked into weighted_second
  std::vector<CMat> weighted_second;      ///< [k] L x L, sum_t p_t E{g_kt g_kt^H}
  std::vector<std::vector<CMat>> second;  ///< [k][t] L x L, only with keep_full

  int num_ues() const { return static_cast<int>(mean_g.rows()); }
  int num_aps() const { return static_cast<int>(mean_g.cols()); }
  CVec mean(int k) const { return mean_g.row(k).transpose(); }
};

/// E{g_kt g_kt^H}. Needs factored moments or empirical ones with keep_full.
CMat second_moment(const GMoments& m, int k, int t);

/// sum_t p_t E{g_kt g_kt^H}, Hermitian-symmetrized.
CMat weighted_second_moment(const GMoments& m, const RVec& powers, int k);

struct MomentOptions {
  MomentEstimator estimator = MomentEstimator::factored;
  bool keep_full = false;   ///< empirical only: also keep every (k, t) matrix
  int workers = 0;          ///< 0: CFMIMO_WORKERS, else hardware concurrency
  std::uint64_t drop = 0;   ///< selects the trial substreams
  int chunk_trials = 64;    ///< reduction granularity, independent of workers
  /// Called on every drawn block before combining (tests only).
  std::function<void(ChannelWorkspace&, long trial)> workspace_hook;
};

/// Worker count from CFMIMO_WORKERS, falling back to hardware concurrency.
int default_workers();

/// Runs `trials` coherence blocks of the drop and accumulates the moments of
/// every requested scheme from the same channel draws. Trial t uses the
/// substream (trial, drop, t) of the scenario seed. Results are bitwise
/// independent of the worker count.
std::vector<GMoments> accumulate_moments(const SystemState& sys, const std::vector<Scheme>& schemes, long trials,
                                         const MomentOptions& options = {});

/// a_k = (sum_t p_t E{g_kt g_kt^H} + sigma^2 F_k)^{-1} E{g_kk}.
CVec optimal_lsfd(const GMoments& m, const RVec& powers, double sigma2, int k);

/// Effective SINR of UE k for the weight vector a.
double uatf_sinr(const GMoments& m, const CVec& a, const RVec& powers, double sigma2, int k);

/// Maximum of uatf_sinr over a: p x / (1 - p x), x = E{g_kk}^H (sum_t p_t E{g g^H} + sigma^2 F)^{-1} E{g_kk}.
double uatf_sinr_max(const GMoments& m, const RVec& powers, double sigma2, int k);

double prelog(int tau_p, int tau_c);
double se_from_sinr(double sinr, int tau_p, int tau_c);

enum class Method { monte_carlo, closed_form, asymptotic };
std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct SEReport {
  Scheme scheme = Scheme::MR;
  PowerMode power_mode = PowerMode::full;
  Method method = Method::monte_carlo;
  double prelog = 1.0;
  RVec sinr;
  RVec se;
  std::string config_digest;
};

/// Short hex digest of every field of the configuration.
std::string config_digest(const ScenarioConfig& config);

/// Per-UE optimal-LSFD SINR and SE from moments.
SEReport monte_carlo_report(const GMoments& m, const SystemState& sys, const RVec& powers, PowerMode mode);

}  // namespace cfmimo
