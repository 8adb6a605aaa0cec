// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/lsfd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace cfmimo {

namespace {

// Raw sums of one scheme over a set of trials.
struct Partial {
  long n = 0;
  std::vector<CMat> g;   // [l] K x K
  std::vector<RMat> g2;  // [l] K x K
  RMat noise;            // K x L
  std::vector<CMat> weighted;
  std::vector<std::vector<CMat>> full;

  Partial(int K, int L, const MomentOptions& opt)
      : g(L, CMat::Zero(K, K)), g2(L, RMat::Zero(K, K)), noise(RMat::Zero(K, L)) {
    if (opt.estimator == MomentEstimator::empirical) {
      weighted.assign(K, CMat::Zero(L, L));
      if (opt.keep_full) full.assign(K, std::vector<CMat>(K, CMat::Zero(L, L)));
    }
  }

  Partial& operator+=(const Partial& o) {
    n += o.n;
    for (std::size_t l = 0; l < g.size(); ++l) {
      g[l] += o.g[l];
      g2[l] += o.g2[l];
    }
    noise += o.noise;
    for (std::size_t k = 0; k < weighted.size(); ++k) weighted[k] += o.weighted[k];
    for (std::size_t k = 0; k < full.size(); ++k)
      for (std::size_t t = 0; t < full[k].size(); ++t) full[k][t] += o.full[k][t];
    return *this;
  }
};

using PartialSet = std::vector<Partial>;  // one per scheme

void add_set(PartialSet& into, const PartialSet& from) {
  for (std::size_t s = 0; s < into.size(); ++s) into[s] += from[s];
}

PartialSet run_chunk(const SystemState& sys, const std::vector<Scheme>& schemes, long first, long last,
                     const MomentOptions& opt) {
  const int K = sys.num_ues();
  const int L = sys.num_aps();
  PartialSet out;
  out.reserve(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) out.emplace_back(K, L, opt);
  const RVec sqrt_p = sys.power.p_ul.cwiseSqrt();
  const CombinerContext ctx = sys.context();

  for (long trial = first; trial < last; ++trial) {
    RandomStream rng(sys.config.seed, {static_cast<std::uint64_t>(StreamPurpose::trial), opt.drop,
                                       static_cast<std::uint64_t>(trial)});
    ChannelWorkspace ws = draw_block(sys.net, sys.pa, sys.stats, sys.p_pilot, sys.antennas(), rng);
    if (opt.workspace_hook) opt.workspace_hook(ws, trial);
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      CombinerSet cs;
      try {
        cs = build_combiners(schemes[s], ctx, ws);
      } catch (const NumericalError& e) {
        throw NumericalError("trial " + std::to_string(trial) + ": " + e.what());
      }
      Partial& acc = out[s];
      std::vector<CMat> gains(opt.estimator == MomentEstimator::empirical ? L : 0);
      for (int l = 0; l < L; ++l) {
        CMat gl = cs.v[l].adjoint() * ws.h[l];
        acc.g[l] += gl;
        acc.g2[l] += gl.cwiseAbs2();
        acc.noise.col(l) += cs.v[l].colwise().squaredNorm().transpose();
        if (!gains.empty()) gains[l] = std::move(gl);
      }
      if (!gains.empty()) {
        CMat a(L, K);
        for (int k = 0; k < K; ++k) {
          for (int l = 0; l < L; ++l) a.row(l) = gains[l].row(k);
          if (!acc.full.empty())
            for (int t = 0; t < K; ++t) acc.full[k][t] += a.col(t) * a.col(t).adjoint();
          a = a * sqrt_p.cast<cd>().asDiagonal();
          acc.weighted[k] += a * a.adjoint();
        }
      }
      acc.n += 1;
    }
  }
  return out;
}

CMat symmetrized(const CMat& s) {
  const CMat sym = 0.5 * (s + s.adjoint());
  const double scale = sym.norm();
  if (scale > 0.0 && (s - sym).norm() > 1e-10 * scale)
    throw NumericalError("second moment deviates from Hermitian symmetry");
  return sym;
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("CFMIMO_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw ConfigError("CFMIMO_WORKERS", "must be an integer in [1, 1024]");
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<GMoments> accumulate_moments(const SystemState& sys, const std::vector<Scheme>& schemes, long trials,
                                         const MomentOptions& options) {
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (options.chunk_trials < 1) throw ConfigError("chunk_trials", "must be >= 1");
  if (schemes.empty()) return {};
  const int K = sys.num_ues();
  const int L = sys.num_aps();
  const int workers = options.workers > 0 ? options.workers : default_workers();
  const long chunk = options.chunk_trials;
  const long num_chunks = (trials + chunk - 1) / chunk;

  // Pairwise merge in chunk order: a binary counter of partial sums.
  std::vector<std::pair<int, PartialSet>> stack;
  auto push = [&stack](PartialSet p) {
    int level = 0;
    while (!stack.empty() && stack.back().first == level) {
      PartialSet left = std::move(stack.back().second);
      stack.pop_back();
      add_set(left, p);
      p = std::move(left);
      ++level;
    }
    stack.emplace_back(level, std::move(p));
  };

  for (long wave = 0; wave < num_chunks; wave += workers) {
    const long count = std::min<long>(workers, num_chunks - wave);
    std::vector<std::optional<PartialSet>> results(count);
    std::vector<std::exception_ptr> errors(count);
    auto work = [&](long j) {
      const long c = wave + j;
      try {
        results[j] = run_chunk(sys, schemes, c * chunk, std::min(trials, (c + 1) * chunk), options);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    };
    if (count == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(count);
      for (long j = 0; j < count; ++j) pool.emplace_back(work, j);
      for (auto& th : pool) th.join();
    }
    for (long j = 0; j < count; ++j) {
      if (errors[j]) std::rethrow_exception(errors[j]);
      push(std::move(*results[j]));
    }
  }
  PartialSet total = std::move(stack.front().second);
  for (std::size_t i = 1; i < stack.size(); ++i) add_set(total, stack[i].second);

  std::vector<GMoments> out(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const Partial& p = total[s];
    const double inv = 1.0 / static_cast<double>(p.n);
    GMoments& m = out[s];
    m.scheme = schemes[s];
    m.estimator = options.estimator;
    m.trials_used = p.n;
    m.mean_g.resize(K, L);
    for (int l = 0; l < L; ++l) m.mean_g.col(l) = p.g[l].diagonal() * inv;
    m.noise_diag = p.noise * inv;
    if (options.estimator == MomentEstimator::factored) {
      m.cross_mean.resize(L);
      m.cross_power.resize(L);
      for (int l = 0; l < L; ++l) {
        m.cross_mean[l] = p.g[l] * inv;
        m.cross_power[l] = p.g2[l] * inv;
      }
    } else {
      m.accumulated_powers = sys.power.p_ul;
      m.weighted_second.resize(K);
      for (int k = 0; k < K; ++k) m.weighted_second[k] = symmetrized(p.weighted[k] * inv);
      if (!p.full.empty()) {
        m.second.assign(K, std::vector<CMat>(K));
        for (int k = 0; k < K; ++k)
          for (int t = 0; t < K; ++t) m.second[k][t] = symmetrized(p.full[k][t] * inv);
      }
    }
  }
  return out;
}

CMat second_moment(const GMoments& m, int k, int t) {
  if (m.estimator == MomentEstimator::empirical) {
    if (m.second.empty()) throw ConfigError("moments", "per-interferer moments were not kept");
    return m.second[k][t];
  }
  const int L = m.num_aps();
  CVec mean(L);
  RVec excess(L);
  for (int l = 0; l < L; ++l) {
    mean(l) = m.cross_mean[l](k, t);
    excess(l) = m.cross_power[l](k, t) - std::norm(mean(l));
  }
  CMat s = mean * mean.adjoint();
  s.diagonal() += excess.cast<cd>();
  return s;
}

CMat weighted_second_moment(const GMoments& m, const RVec& powers, int k) {
  const int K = m.num_ues();
  const int L = m.num_aps();
  if (powers.size() != K) throw ConfigError("powers", "size must equal K");
  if (m.estimator == MomentEstimator::empirical) {
    if (m.accumulated_powers.size() == K && m.accumulated_powers == powers) return m.weighted_second[k];
    if (m.second.empty())
      throw ConfigError("powers", "empirical moments were accumulated for different powers");
    CMat s = CMat::Zero(L, L);
    for (int t = 0; t < K; ++t) s += powers(t) * m.second[k][t];
    return symmetrized(s);
  }
  CMat means(L, K);
  RVec excess = RVec::Zero(L);
  for (int l = 0; l < L; ++l) {
    for (int t = 0; t < K; ++t) {
      const cd g = m.cross_mean[l](k, t);
      means(l, t) = std::sqrt(powers(t)) * g;
      excess(l) += powers(t) * (m.cross_power[l](k, t) - std::norm(g));
    }
  }
  CMat s = means * means.adjoint();
  s.diagonal() += excess.cast<cd>();
  return symmetrized(s);
}

namespace {

CMat lsfd_system(const GMoments& m, const RVec& powers, double sigma2, int k) {
  CMat c = weighted_second_moment(m, powers, k);
  c.diagonal() += (sigma2 * m.noise_diag.row(k).transpose()).cast<cd>();
  return c;
}

}  // namespace

CVec optimal_lsfd(const GMoments& m, const RVec& powers, double sigma2, int k) {
  const Eigen::LDLT<CMat> ldlt(lsfd_system(m, powers, sigma2, k));
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().real().minCoeff() > 0.0))
    throw NumericalError("UE " + std::to_string(k) + ": singular LSFD system");
  return ldlt.solve(m.mean(k));
}

double uatf_sinr(const GMoments& m, const CVec& a, const RVec& powers, double sigma2, int k) {
  const CMat s = weighted_second_moment(m, powers, k);
  const double signal = powers(k) * std::norm(a.dot(m.mean(k)));
  const double total = a.dot(s * a).real();
  const double noise = sigma2 * (a.cwiseAbs2().array() * m.noise_diag.row(k).transpose().array()).sum();
  const double den = total - signal + noise;
  return den > 0.0 ? signal / den : 0.0;
}

double uatf_sinr_max(const GMoments& m, const RVec& powers, double sigma2, int k) {
  const CVec a = optimal_lsfd(m, powers, sigma2, k);
  const double x = m.mean(k).dot(a).real();
  const double px = powers(k) * x;
  if (!(px < 1.0)) throw NumericalError("UE " + std::to_string(k) + ": LSFD system not positive definite");
  return std::max(0.0, px / (1.0 - px));
}

double prelog(int tau_p, int tau_c) {
  if (tau_p < 0 || tau_p > tau_c) throw ConfigError("tau_p", "must lie in [0, tau_c]");
  return 1.0 - static_cast<double>(tau_p) / tau_c;
}

double se_from_sinr(double sinr, int tau_p, int tau_c) { return prelog(tau_p, tau_c) * std::log2(1.0 + sinr); }

std::string_view to_string(Method m) {
  switch (m) {
    case Method::monte_carlo: return "monte-carlo";
    case Method::closed_form: return "closed-form";
    case Method::asymptotic: return "asymptotic";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::monte_carlo, Method::closed_form, Method::asymptotic})
    if (name == to_string(m)) return m;
  throw ConfigError("methods", "unknown method '" + std::string(name) + "'");
}

std::string config_digest(const ScenarioConfig& c) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d|%d|%d|%d|%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%llu|%d", c.L, c.N,
                c.K, c.tau_p, c.tau_c, c.area_m, c.p_max_W, c.p_pilot_W, c.noise_dBm, c.pathloss.offset_dB,
                c.pathloss.exponent, c.pathloss.shadow_sigma_dB, c.v_percent,
                static_cast<unsigned long long>(c.seed), c.trials);
  std::uint64_t h = 1469598103934665603ull;
  for (const char* p = buf; *p; ++p) {
    h ^= static_cast<unsigned char>(*p);
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

SEReport monte_carlo_report(const GMoments& m, const SystemState& sys, const RVec& powers, PowerMode mode) {
  SEReport r;
  r.scheme = m.scheme;
  r.power_mode = mode;
  r.method = Method::monte_carlo;
  r.prelog = prelog(sys.config.tau_p, sys.config.tau_c);
  r.config_digest = config_digest(sys.config);
  const int K = m.num_ues();
  r.sinr.resize(K);
  r.se.resize(K);
  for (int k = 0; k < K; ++k) {
    r.sinr(k) = uatf_sinr_max(m, powers, sys.net.sigma2, k);
    r.se(k) = r.prelog * std::log2(1.0 + r.sinr(k));
  }
  return r;
}

}  // namespace cfmimo
