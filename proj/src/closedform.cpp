// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/closedform.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace cfmimo {

namespace {

// How UE k is served by one AP.
//   strong: nulling over a tau-dimensional pilot basis (gain 1, variance factor 1/(N - tau))
//   mr:     plain MR (gain N)
//   pmr:    MR projected off the strong basis (gain N - tau)
// Suppressed interferers only leak through their estimation error.
struct Branch {
  double gain = 1.0;
  double var = 1.0;
  bool suppress_all = false;
  bool suppress_strong = false;
};

Branch branch_for(Scheme scheme, const ClosedFormInputs& in, int k, int l) {
  const int N = in.N;
  if (scheme == Scheme::FZF) {
    if (N <= in.pa.tau_p) throw ConfigError("N", "FZF needs N >= tau_p + 1");
    return {1.0, 1.0 / (N - in.pa.tau_p), true, false};
  }
  const int tau = in.ga.tau_s[l];
  if (N <= tau) throw ConfigError("N", "partial ZF needs N >= tau_S + 1 at every AP");
  if (in.ga.is_strong(k, l)) return {1.0, 1.0 / (N - tau), false, true};
  if (scheme == Scheme::PFZF) return {static_cast<double>(N), static_cast<double>(N), false, false};
  return {static_cast<double>(N - tau), static_cast<double>(N - tau), false, true};
}

}  // namespace

ClosedFormTerms zf_family_terms(Scheme scheme, const ClosedFormInputs& in, int k) {
  if (!is_zf_family(scheme)) throw ConfigError("scheme", "no closed form for " + std::string(to_string(scheme)));
  const int K = in.net.num_ues();
  const int L = in.net.num_aps();
  const RMat& beta = in.net.beta;
  const RMat& gamma = in.stats.gamma;

  ClosedFormTerms out;
  out.b.resize(L);
  out.diag.resize(L);
  for (int t : in.pa.copilots[k])
    if (t != k) {
      out.copilots.push_back(t);
      out.d.emplace_back(L);
    }
  for (int l = 0; l < L; ++l) {
    const Branch br = branch_for(scheme, in, k, l);
    const double g = gamma(k, l);
    out.b(l) = br.gain * g;
    for (std::size_t j = 0; j < out.copilots.size(); ++j)
      out.d[j](l) = br.gain * std::sqrt(g * gamma(out.copilots[j], l));
    double interference = 0.0;
    for (int t = 0; t < K; ++t) {
      const bool suppressed = br.suppress_all || (br.suppress_strong && in.ga.is_strong(t, l));
      interference += in.powers(t) * (suppressed ? beta(t, l) - gamma(t, l) : beta(t, l));
    }
    out.diag(l) = br.var * g * (interference + in.net.sigma2);
  }
  return out;
}

RMat closed_form_matrix(const ClosedFormTerms& terms, const RVec& powers) {
  RMat c = terms.diag.asDiagonal();
  for (std::size_t j = 0; j < terms.copilots.size(); ++j)
    c += powers(terms.copilots[j]) * terms.d[j] * terms.d[j].transpose();
  return c;
}

double closed_form_sinr_at(const ClosedFormTerms& terms, const RVec& powers, int k, const RVec& a) {
  const double num = powers(k) * std::pow(a.dot(terms.b), 2);
  const double den = a.dot(closed_form_matrix(terms, powers) * a);
  return den > 0.0 ? num / den : 0.0;
}

ClosedFormResult solve_closed_form(const ClosedFormTerms& terms, const RVec& powers, int k, double prelog) {
  const Eigen::LDLT<RMat> ldlt(closed_form_matrix(terms, powers));
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
    throw NumericalError("UE " + std::to_string(k) + ": singular closed-form interference matrix");
  ClosedFormResult r;
  r.a = ldlt.solve(terms.b);
  r.sinr = std::max(0.0, powers(k) * terms.b.dot(r.a));
  r.se = prelog * std::log2(1.0 + r.sinr);
  return r;
}

ClosedFormResult fzf_se_closed(const ClosedFormInputs& in, int k) {
  return solve_closed_form(zf_family_terms(Scheme::FZF, in, k), in.powers, k, prelog(in.pa.tau_p, in.tau_c));
}

ClosedFormResult pfzf_se_closed(const ClosedFormInputs& in, int k) {
  return solve_closed_form(zf_family_terms(Scheme::PFZF, in, k), in.powers, k, prelog(in.pa.tau_p, in.tau_c));
}

ClosedFormResult pwpfzf_se_closed(const ClosedFormInputs& in, int k) {
  return solve_closed_form(zf_family_terms(Scheme::PWPFZF, in, k), in.powers, k, prelog(in.pa.tau_p, in.tau_c));
}

double spectral_radius(const RMat& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::EigenSolver<RMat> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

FixedPointState mlrzf_fixed_point(const RVec& theta, int N, double alpha, double tol, int max_iter) {
  if (!(alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
  if (N < 1) throw ConfigError("N", "must be >= 1");
  if ((theta.array() <= 0.0).any()) throw ConfigError("theta", "must be > 0");
  const int tau = static_cast<int>(theta.size());
  FixedPointState fp;
  fp.theta = theta;
  fp.alpha = alpha;
  fp.N = N;
  fp.e = RVec::Constant(tau, 1.0 / alpha);

  auto t_of = [&](const RVec& e) {
    return 1.0 / ((theta.array() / (1.0 + e.array())).sum() / N + alpha);
  };
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const RVec next = theta * t_of(fp.e);
    fp.residual = ((next - fp.e).array().abs() / next.array()).maxCoeff();
    fp.e = next;
    fp.iterations = it;
    if (fp.residual < tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError("mLRZF fixed point did not converge (residual " + std::to_string(fp.residual) + ")");
  fp.T = t_of(fp.e);
  fp.e = theta * fp.T;

  const RVec denom = (1.0 + fp.e.array()).square();
  fp.J.resize(tau, tau);
  for (int i = 0; i < tau; ++i)
    for (int j = 0; j < tau; ++j) fp.J(i, j) = theta(i) * fp.T * theta(j) * fp.T / (N * denom(j));
  if (!(spectral_radius(fp.J) < 1.0)) throw NumericalError("mLRZF derivative system is not contractive");
  const Eigen::PartialPivLU<RMat> lu(RMat::Identity(tau, tau) - fp.J);
  const RVec w = theta * (fp.T * fp.T);
  fp.e_prime = lu.solve(w);
  fp.T_prime = fp.e_prime(0) / theta(0);
  // Right-hand side theta_k w gives e'_{ik} = theta_i theta_k T'.
  fp.e_cross = lu.solve(w * theta.transpose());
  return fp;
}

std::vector<FixedPointState> mlrzf_fixed_points(const EstimationStats& stats, double sigma2, int N, double alpha) {
  std::vector<FixedPointState> out;
  out.reserve(stats.theta.cols());
  for (Eigen::Index l = 0; l < stats.theta.cols(); ++l) out.push_back(mlrzf_fixed_point(stats.theta.col(l) / sigma2, N, alpha));
  return out;
}

ClosedFormTerms mlrzf_terms(const std::vector<FixedPointState>& fp, const ClosedFormInputs& in, int k,
                            bool copilot_error) {
  const int K = in.net.num_ues();
  const int L = in.net.num_aps();
  if (static_cast<int>(fp.size()) != L) throw ConfigError("fixed_points", "one state per AP required");
  const double s2 = in.net.sigma2;
  const int i = in.pa.pilot[k];

  ClosedFormTerms out;
  out.b.resize(L);
  out.diag.resize(L);
  for (int t : in.pa.copilots[k])
    if (t != k) {
      out.copilots.push_back(t);
      out.d.emplace_back(L);
    }
  for (int l = 0; l < L; ++l) {
    const FixedPointState& f = fp[l];
    const double ck = in.stats.c(k, l);
    const double ek = f.e(i);
    const double share = ek / (1.0 + ek);
    const double n = f.N;
    out.b(l) = ck * ck * share;
    for (std::size_t j = 0; j < out.copilots.size(); ++j) out.d[j](l) = ck * in.stats.c(out.copilots[j], l) * share;

    double other_pilots = 0.0;
    double error = 0.0;
    for (int t = 0; t < K; ++t) {
      const int it = in.pa.pilot[t];
      const double ct = in.stats.c(t, l);
      if (it == i && !copilot_error) continue;
      if (it != i) other_pilots += in.powers(t) * ct * ct * f.e_cross(it, i) / std::pow(1.0 + f.e(it), 2);
      error += in.powers(t) * (in.net.beta(t, l) - in.stats.gamma(t, l)) / s2;
    }
    const double q = 1.0 / std::pow(1.0 + ek, 2);
    out.diag(l) = ck * ck * q / n * (other_pilots + f.e_prime(i) * (error + 1.0));
  }
  return out;
}

ClosedFormResult mlrzf_asymptotic_se(const std::vector<FixedPointState>& fp, const ClosedFormInputs& in, int k,
                                     bool copilot_error) {
  return solve_closed_form(mlrzf_terms(fp, in, k, copilot_error), in.powers, k, prelog(in.pa.tau_p, in.tau_c));
}

SEReport closed_form_report(Scheme scheme, const SystemState& sys, const RVec& powers, PowerMode mode) {
  const ClosedFormInputs in = closed_form_inputs(sys, powers);
  SEReport r;
  r.scheme = scheme;
  r.power_mode = mode;
  r.prelog = prelog(sys.config.tau_p, sys.config.tau_c);
  r.config_digest = config_digest(sys.config);
  const int K = sys.num_ues();
  r.sinr.resize(K);
  r.se.resize(K);
  std::vector<FixedPointState> fp;
  if (scheme == Scheme::mLRZF) {
    r.method = Method::asymptotic;
    fp = mlrzf_fixed_points(sys.stats, sys.net.sigma2, sys.antennas(), sys.alpha);
  } else if (is_zf_family(scheme)) {
    r.method = Method::closed_form;
  } else {
    throw ConfigError("methods", "no closed form for " + std::string(to_string(scheme)));
  }
  for (int k = 0; k < K; ++k) {
    const ClosedFormResult res =
        scheme == Scheme::mLRZF ? mlrzf_asymptotic_se(fp, in, k)
                                : solve_closed_form(zf_family_terms(scheme, in, k), powers, k, r.prelog);
    r.sinr(k) = res.sinr;
    r.se(k) = res.se;
  }
  return r;
}

}  // namespace cfmimo
