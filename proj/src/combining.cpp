// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/combining.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace cfmimo {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::MR: return "MR";
    case Scheme::FZF: return "FZF";
    case Scheme::PFZF: return "PFZF";
    case Scheme::PWPFZF: return "PWPFZF";
    case Scheme::LRZF: return "LRZF";
    case Scheme::mLRZF: return "mLRZF";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::MR, Scheme::FZF, Scheme::PFZF, Scheme::PWPFZF, Scheme::LRZF, Scheme::mLRZF})
    if (name == to_string(s)) return s;
  throw ConfigError("schemes", "unknown scheme '" + std::string(name) + "'");
}

bool is_zf_family(Scheme s) { return s == Scheme::FZF || s == Scheme::PFZF || s == Scheme::PWPFZF; }

bool has_closed_form(Scheme s) { return is_zf_family(s); }

PilotSubspace::PilotSubspace(const CMat& hbar, const std::vector<int>& pilots, int ap) {
  const auto N = hbar.rows();
  const auto tau = static_cast<Eigen::Index>(pilots.size());
  if (tau == 0) {
    q_.resize(N, 0);
    dual_.resize(N, 0);
    return;
  }
  if (tau > N)
    throw NumericalError("AP " + std::to_string(ap) + ": " + std::to_string(tau) + " pilot columns exceed " +
                         std::to_string(N) + " antennas");
  CMat a(N, tau);
  RVec scale(tau);
  for (Eigen::Index j = 0; j < tau; ++j) {
    a.col(j) = hbar.col(pilots[j]);
    const double norm = a.col(j).norm();
    if (!(norm > 0.0)) throw NumericalError("AP " + std::to_string(ap) + ": zero pilot column");
    scale(j) = 1.0 / norm;
    a.col(j) *= scale(j);
  }
  Eigen::HouseholderQR<CMat> qr(a);
  const CMat r = qr.matrixQR().topLeftCorner(tau, tau).triangularView<Eigen::Upper>();
  const RVec diag = r.diagonal().cwiseAbs();
  const double ratio = diag.maxCoeff() / diag.minCoeff();
  if (!(ratio * ratio <= kMaxGramCondition))
    throw NumericalError("AP " + std::to_string(ap) + ": ill-conditioned pilot Gram matrix (condition ~" +
                         std::to_string(ratio * ratio) + ")");
  q_ = qr.householderQ() * CMat::Identity(N, tau);
  // hbar E (E^H hbar^H hbar E)^{-1} = Q R^{-H} S.
  CMat rhs = scale.cast<cd>().asDiagonal();
  r.adjoint().triangularView<Eigen::Lower>().solveInPlace(rhs);
  dual_ = q_ * rhs;
}

CVec PilotSubspace::project_out(const CVec& x) const {
  if (q_.cols() == 0) return x;
  return x - q_ * (q_.adjoint() * x);
}

CMat PilotSubspace::complement_projector() const {
  const auto N = q_.rows();
  return CMat::Identity(N, N) - q_ * q_.adjoint();
}

CombinerSet mr_combiner(const ChannelWorkspace& ws) { return {Scheme::MR, ws.hhat}; }

namespace {

// Shared body of FZF/PFZF/PWPFZF. all_strong selects FZF.
CombinerSet partial_zf(Scheme scheme, const ChannelWorkspace& ws, const EstimationStats& stats,
                       const PilotAssignment& pa, const GroupAssignment* ga) {
  const int L = ws.num_aps();
  const int K = ws.num_ues();
  CombinerSet out{scheme, std::vector<CMat>(L)};
  std::vector<int> every_pilot(pa.tau_p);
  std::iota(every_pilot.begin(), every_pilot.end(), 0);

  for (int l = 0; l < L; ++l) {
    const std::vector<int>& pilots = ga ? ga->strong_pilots[l] : every_pilot;
    const PilotSubspace basis(ws.hbar[l], pilots, l);
    CMat& v = out.v[l];
    v.resize(ws.antennas(), K);
    for (int k = 0; k < K; ++k) {
      const int i = pa.pilot[k];
      const int j = ga ? ga->local_index(i, l) : i;
      if (j >= 0) {
        v.col(k) = (stats.c(k, l) * stats.theta(i, l)) * basis.dual_column(j);
      } else if (scheme == Scheme::PWPFZF) {
        v.col(k) = basis.project_out(ws.hhat[l].col(k));
      } else {
        v.col(k) = ws.hhat[l].col(k);
      }
    }
  }
  return out;
}

}  // namespace

CombinerSet fzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa) {
  if (ws.antennas() < pa.tau_p + 1) throw ConfigError("N", "FZF needs N >= tau_p + 1");
  return partial_zf(Scheme::FZF, ws, stats, pa, nullptr);
}

CombinerSet pfzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                          const GroupAssignment& ga) {
  for (int l = 0; l < ws.num_aps(); ++l)
    if (ws.antennas() < ga.tau_s[l] + 1) throw ConfigError("N", "PFZF needs N >= tau_S + 1 at every AP");
  return partial_zf(Scheme::PFZF, ws, stats, pa, &ga);
}

CombinerSet pwpfzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                            const GroupAssignment& ga) {
  for (int l = 0; l < ws.num_aps(); ++l)
    if (ws.antennas() < ga.tau_s[l] + 1) throw ConfigError("N", "PWPFZF needs N >= tau_S + 1 at every AP");
  return partial_zf(Scheme::PWPFZF, ws, stats, pa, &ga);
}

double lrzf_regularizer(const NetworkRealization& net, const EstimationStats& stats, const RVec& powers, int l) {
  double phi = 0.0;
  for (int t = 0; t < net.num_ues(); ++t) phi += powers(t) * (net.beta(t, l) - stats.gamma(t, l));
  return net.sigma2 + phi;
}

CombinerSet lrzf_combiner(const ChannelWorkspace& ws, const NetworkRealization& net, const EstimationStats& stats,
                          const PilotAssignment& pa, const RVec& powers) {
  const int L = ws.num_aps();
  const int K = ws.num_ues();
  const int tau_p = pa.tau_p;
  CombinerSet out{Scheme::LRZF, std::vector<CMat>(L)};
  for (int l = 0; l < L; ++l) {
    const double lambda = lrzf_regularizer(net, stats, powers, l);
    if (!(lambda > 0.0)) throw NumericalError("AP " + std::to_string(l) + ": LRZF regularizer is not positive");
    RVec f = RVec::Zero(tau_p);
    CMat rhs = CMat::Zero(tau_p, K);
    for (int t = 0; t < K; ++t) {
      f(pa.pilot[t]) += powers(t) * stats.c(t, l) * stats.c(t, l);
      rhs(pa.pilot[t], t) = powers(t) * stats.c(t, l);
    }
    const CMat& hb = ws.hbar[l];
    CMat system = f.cast<cd>().asDiagonal() * (hb.adjoint() * hb);
    system.diagonal().array() += lambda;
    Eigen::ColPivHouseholderQR<CMat> qr(system);
    if (qr.rank() < tau_p) throw NumericalError("AP " + std::to_string(l) + ": singular LRZF system");
    out.v[l] = hb * qr.solve(rhs);
  }
  return out;
}

CombinerSet lrzf_combiner_direct(const ChannelWorkspace& ws, const NetworkRealization& net,
                                 const EstimationStats& stats, const RVec& powers) {
  const int L = ws.num_aps();
  const int N = ws.antennas();
  CombinerSet out{Scheme::LRZF, std::vector<CMat>(L)};
  for (int l = 0; l < L; ++l) {
    const CMat hp = ws.hhat[l] * powers.cast<cd>().asDiagonal();
    CMat system = hp * ws.hhat[l].adjoint();
    system += lrzf_regularizer(net, stats, powers, l) * CMat::Identity(N, N);
    out.v[l] = system.llt().solve(hp);
  }
  return out;
}

CombinerSet mlrzf_combiner(const ChannelWorkspace& ws, const EstimationStats& stats, const PilotAssignment& pa,
                           double sigma2, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
  const int L = ws.num_aps();
  const int K = ws.num_ues();
  const int N = ws.antennas();
  const int tau_p = pa.tau_p;
  CombinerSet out{Scheme::mLRZF, std::vector<CMat>(L)};
  for (int l = 0; l < L; ++l) {
    const CMat& hb = ws.hbar[l];
    // (hbar hbar^H + a I)^{-1} hbar = hbar (hbar^H hbar + a I)^{-1}
    CMat gram = hb.adjoint() * hb;
    gram.diagonal().array() += N * alpha * sigma2;
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("AP " + std::to_string(l) + ": mLRZF system not positive definite");
    const CMat w = hb * llt.solve(CMat::Identity(tau_p, tau_p));
    CMat& v = out.v[l];
    v.resize(N, K);
    for (int k = 0; k < K; ++k) v.col(k) = stats.c(k, l) * w.col(pa.pilot[k]);
  }
  return out;
}

CombinerSet build_combiners(Scheme scheme, const CombinerContext& ctx, const ChannelWorkspace& ws) {
  switch (scheme) {
    case Scheme::MR: return mr_combiner(ws);
    case Scheme::FZF: return fzf_combiner(ws, ctx.stats, ctx.pa);
    case Scheme::PFZF:
      if (!ctx.ga) throw ConfigError("groups", "PFZF needs a group assignment");
      return pfzf_combiner(ws, ctx.stats, ctx.pa, *ctx.ga);
    case Scheme::PWPFZF:
      if (!ctx.ga) throw ConfigError("groups", "PWPFZF needs a group assignment");
      return pwpfzf_combiner(ws, ctx.stats, ctx.pa, *ctx.ga);
    case Scheme::LRZF:
      if (!ctx.powers) throw ConfigError("powers", "LRZF needs data powers");
      return lrzf_combiner(ws, ctx.net, ctx.stats, ctx.pa, *ctx.powers);
    case Scheme::mLRZF: return mlrzf_combiner(ws, ctx.stats, ctx.pa, ctx.net.sigma2, ctx.alpha);
  }
  throw ConfigError("scheme", "unhandled scheme");
}

}  // namespace cfmimo
