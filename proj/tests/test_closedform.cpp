// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cfmimo/closedform.hpp"
#include "support.hpp"

using namespace cfmimo;

namespace {

// Scalar fixed point e = theta / (theta / (N (1 + e)) + alpha) by bisection.
double bisect_fixed_point(double theta, int N, double alpha) {
  auto f = [&](double e) { return e - theta / (theta / (N * (1.0 + e)) + alpha); };
  double lo = 0.0, hi = theta / alpha + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double power_iteration(const RMat& m) {
  RVec x = RVec::Ones(m.rows());
  double lambda = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const RVec y = m * x;
    lambda = y.norm() / x.norm();
    x = y / y.norm();
  }
  return lambda;
}

}  // namespace

TEST_SUITE("closedform") {

TEST_CASE("FZF single AP without co-pilots reduces to the scalar formula") {
  RMat beta(3, 1);
  beta << 4e-10, 1e-10, 3e-11;
  const double s2 = 1e-12;
  auto cfg = test::small_config(1, 6, 3, 3);
  const auto sys = make_system(cfg, network_from_beta(beta, s2), PilotAssignment::from_indices({0, 1, 2}, 3),
                               full_power(3, 0.1));
  const RVec& p = sys.power.p_ul;
  const auto in = closed_form_inputs(sys, p);
  for (int k = 0; k < 3; ++k) {
    const double g = sys.stats.gamma(k, 0);
    double leak = 0.0;
    for (int t = 0; t < 3; ++t) leak += p(t) * (beta(t, 0) - sys.stats.gamma(t, 0));
    const double expect = (6 - 3) * p(k) * g * g / (g * leak + s2 * g);
    CHECK(fzf_se_closed(in, k).sinr == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("vanishing estimate quality drives the SINR to zero") {
  RMat beta = RMat::Constant(2, 3, 1e-20);
  const auto sys = make_system(test::small_config(3, 4, 2, 2), network_from_beta(beta, 1e-12),
                               PilotAssignment::from_indices({0, 1}, 2), full_power(2, 0.1));
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  CHECK(fzf_se_closed(in, 0).sinr < 1e-12);
}

TEST_CASE("all-strong grouping: PFZF and PWPFZF coincide with FZF") {
  auto sys = make_system(test::small_config(8, 8, 10, 7, 3), PowerMode::full, 1.0, 0);
  sys.ga = GroupAssignment::all_strong(sys.pa, 8);
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  for (int k = 0; k < 10; ++k) {
    const auto a = fzf_se_closed(in, k);
    CHECK(pfzf_se_closed(in, k).sinr == a.sinr);
    CHECK(pwpfzf_se_closed(in, k).sinr == a.sinr);
  }
}

TEST_CASE("weak-AP terms follow the projected-MR moments") {
  const auto sys = make_system(test::small_config(10, 8, 10, 7, 5), PowerMode::full, 1.0, 0);
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  const RMat& beta = sys.net.beta;
  const RMat& gamma = sys.stats.gamma;
  const RVec& p = sys.power.p_ul;
  for (int k = 0; k < 10; ++k) {
    const auto w = zf_family_terms(Scheme::PWPFZF, in, k);
    const auto m = zf_family_terms(Scheme::PFZF, in, k);
    for (int l : sys.ga.weak_aps[k]) {
      const int n = 8 - sys.ga.tau_s[l];
      double protected_sum = 0.0, plain_sum = 0.0;
      for (int t = 0; t < 10; ++t) {
        protected_sum += p(t) * (sys.ga.is_strong(t, l) ? beta(t, l) - gamma(t, l) : beta(t, l));
        plain_sum += p(t) * beta(t, l);
      }
      CHECK(w.b(l) == doctest::Approx(n * gamma(k, l)));
      CHECK(w.diag(l) == doctest::Approx(n * gamma(k, l) * (protected_sum + sys.net.sigma2)));
      CHECK(m.b(l) == doctest::Approx(8 * gamma(k, l)));
      CHECK(m.diag(l) == doctest::Approx(8 * gamma(k, l) * (plain_sum + sys.net.sigma2)));
    }
    for (int l : sys.ga.strong_aps[k]) {
      CHECK(w.b(l) == m.b(l));
      CHECK(w.diag(l) == m.diag(l));
    }
  }
}

TEST_CASE("optimal closed-form weights dominate and are scale invariant") {
  const auto sys = make_system(test::small_config(10, 8, 10, 7, 6), PowerMode::full, 1.0, 0);
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  RandomStream r(2);
  for (Scheme s : {Scheme::FZF, Scheme::PFZF, Scheme::PWPFZF})
    for (int k = 0; k < 10; ++k) {
      const auto terms = zf_family_terms(s, in, k);
      const auto best = solve_closed_form(terms, sys.power.p_ul, k, 1.0);
      CHECK(closed_form_sinr_at(terms, sys.power.p_ul, k, best.a) == doctest::Approx(best.sinr).epsilon(1e-10));
      CHECK(closed_form_sinr_at(terms, sys.power.p_ul, k, 4.2 * best.a) == doctest::Approx(best.sinr).epsilon(1e-10));
      for (int j = 0; j < 50; ++j) {
        RVec a(10);
        for (int l = 0; l < 10; ++l) a(l) = r.uniform(0.0, 1.0);
        CHECK(closed_form_sinr_at(terms, sys.power.p_ul, k, a) <= best.sinr * (1.0 + 1e-12));
      }
    }
}

TEST_CASE("closed forms track Monte Carlo at small scale") {
  const auto sys = make_system(test::small_config(8, 8, 6, 4, 17), PowerMode::full, 1.0, 0);
  const std::vector<Scheme> schemes{Scheme::FZF, Scheme::PFZF, Scheme::PWPFZF};
  const auto m = accumulate_moments(sys, schemes, 6000, {});
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const auto mc = monte_carlo_report(m[s], sys, sys.power.p_ul, PowerMode::full);
    const auto cf = closed_form_report(schemes[s], sys, sys.power.p_ul, PowerMode::full);
    for (int k = 0; k < 6; ++k) CHECK(test::rel(mc.se(k), cf.se(k)) < 0.02);
  }
}

TEST_CASE("all-weak PFZF matches Monte-Carlo MR") {
  auto sys = make_system(test::small_config(8, 6, 6, 4, 19), PowerMode::full, 1.0, 0);
  sys.ga = GroupAssignment::all_weak(sys.pa, 8);
  const auto m = accumulate_moments(sys, {Scheme::MR}, 6000, {})[0];
  const auto mc = monte_carlo_report(m, sys, sys.power.p_ul, PowerMode::full);
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  for (int k = 0; k < 6; ++k) CHECK(test::rel(mc.se(k), pfzf_se_closed(in, k).se) < 0.02);
}

TEST_CASE("fixed point: scalar case against bisection") {
  for (double theta : {0.3, 2.0, 50.0, 1e4})
    for (int N : {2, 8, 64})
      for (double alpha : {0.1, 0.8, 5.0}) {
        const auto fp = mlrzf_fixed_point(RVec::Constant(1, theta), N, alpha);
        CHECK(fp.e(0) == doctest::Approx(bisect_fixed_point(theta, N, alpha)).epsilon(1e-8));
        CHECK(fp.residual < 1e-9);
      }
  // One antenna against a huge SNR contracts too slowly for the iteration budget.
  CHECK_THROWS_AS(mlrzf_fixed_point(RVec::Constant(1, 1e4), 1, 0.1), NumericalError);
}

TEST_CASE("fixed point: derivative system") {
  RandomStream r(4);
  RVec theta(6);
  for (int i = 0; i < 6; ++i) theta(i) = std::pow(10.0, r.uniform(-1.0, 3.0));
  const int N = 12;
  const auto fp = mlrzf_fixed_point(theta, N, 0.8);
  CHECK((fp.e.array() > 0.0).all());
  const double rho = power_iteration(fp.J);
  CHECK(rho < 1.0);
  CHECK(spectral_radius(fp.J) == doctest::Approx(rho).epsilon(1e-8));
  // Scalar form of T' and the cross terms.
  const double sum = (theta.array().square() / (1.0 + fp.e.array()).square()).sum() / N;
  const double t_prime = fp.T * fp.T / (1.0 - fp.T * fp.T * sum);
  CHECK(fp.T_prime == doctest::Approx(t_prime).epsilon(1e-10));
  for (int i = 0; i < 6; ++i) {
    CHECK(fp.e_prime(i) == doctest::Approx(theta(i) * t_prime).epsilon(1e-10));
    for (int j = 0; j < 6; ++j) CHECK(fp.e_cross(i, j) == doctest::Approx(theta(i) * theta(j) * t_prime).epsilon(1e-10));
  }
  // T' is -dT/dalpha: compare with a central difference.
  const double h = 1e-5;
  const double dT = (mlrzf_fixed_point(theta, N, 0.8 + h, 1e-14, 5000).T -
                     mlrzf_fixed_point(theta, N, 0.8 - h, 1e-14, 5000).T) / (2 * h);
  CHECK(-dT == doctest::Approx(fp.T_prime).epsilon(1e-5));
}

TEST_CASE("fixed point: heavy regularization") {
  const RVec theta = (RVec(3) << 1.0, 4.0, 9.0).finished();
  const auto fp = mlrzf_fixed_point(theta, 8, 1e6);
  for (int i = 0; i < 3; ++i) CHECK(fp.e(i) == doctest::Approx(theta(i) / 1e6).epsilon(1e-5));
  CHECK_THROWS_AS(mlrzf_fixed_point(theta, 8, 0.0), ConfigError);
  CHECK_THROWS_AS(mlrzf_fixed_point(theta, 8, 0.8, 1e-30, 2), NumericalError);
}

TEST_CASE("mLRZF single UE: only the noise term remains") {
  RMat beta(1, 3);
  beta << 2e-11, 5e-12, 1e-12;
  const double s2 = 1e-12;
  const auto sys = make_system(test::small_config(3, 16, 1, 1), network_from_beta(beta, s2),
                               PilotAssignment::from_indices({0}, 1), full_power(1, 0.1));
  const auto in = closed_form_inputs(sys, sys.power.p_ul);
  const auto fp = mlrzf_fixed_points(sys.stats, s2, 16, 0.8);
  const auto terms = mlrzf_terms(fp, in, 0);
  const RVec a = (RVec(3) << 1.0, 0.5, 2.0).finished();
  double num = 0.0, den = 0.0;
  for (int l = 0; l < 3; ++l) {
    const double c = sys.stats.c(0, l), e = fp[l].e(0);
    const double zeta = fp[l].e_prime(0) / (16 * (1 + e) * (1 + e));
    num += a(l) * c * c * e / (1 + e);
    den += a(l) * a(l) * c * c * zeta;
  }
  CHECK(closed_form_sinr_at(terms, sys.power.p_ul, 0, a) == doctest::Approx(0.1 * num * num / den).epsilon(1e-12));
  // The refinement adds the UE's own estimation-error leakage.
  const auto refined = mlrzf_terms(fp, in, 0, true);
  CHECK(refined.diag(0) > terms.diag(0));
}

TEST_CASE("closed-form report rejects schemes without a closed form") {
  const auto sys = make_system(test::small_config(3, 8, 4, 2), PowerMode::full, 1.0, 0);
  CHECK_THROWS_AS(closed_form_report(Scheme::LRZF, sys, sys.power.p_ul, PowerMode::full), ConfigError);
  const auto r = closed_form_report(Scheme::mLRZF, sys, sys.power.p_ul, PowerMode::full);
  CHECK(r.method == Method::asymptotic);
}

}
