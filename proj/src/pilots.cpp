// SPDX-License-Identifier: Apache-2.0
#include "cfmimo/pilots.hpp"

#include <algorithm>
#include <numeric>

namespace cfmimo {

namespace {

void shuffle(std::vector<int>& v, RandomStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

PilotAssignment PilotAssignment::from_indices(std::vector<int> pilot, int tau_p) {
  if (tau_p < 1) throw ConfigError("tau_p", "must be >= 1");
  for (int p : pilot)
    if (p < 0 || p >= tau_p) throw ConfigError("pilot", "index out of range");
  PilotAssignment pa;
  pa.tau_p = tau_p;
  pa.pilot = std::move(pilot);
  const int K = pa.num_ues();
  pa.copilots.assign(K, {});
  for (int k = 0; k < K; ++k)
    for (int t = 0; t < K; ++t)
      if (pa.pilot[t] == pa.pilot[k]) pa.copilots[k].push_back(t);
  return pa;
}

std::vector<int> PilotAssignment::users_of(int i) const {
  std::vector<int> out;
  for (int k = 0; k < num_ues(); ++k)
    if (pilot[k] == i) out.push_back(k);
  return out;
}

PilotAssignment assign_pilots_random(int K, int tau_p, RandomStream& rng) {
  if (tau_p < 1) throw ConfigError("tau_p", "must be >= 1");
  if (K < 1) throw ConfigError("K", "must be >= 1");
  std::vector<int> pilot(K);
  if (K <= tau_p) {
    std::vector<int> book(tau_p);
    std::iota(book.begin(), book.end(), 0);
    shuffle(book, rng);
    std::copy_n(book.begin(), K, pilot.begin());
  } else {
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (int j = 0; j < tau_p; ++j) pilot[order[j]] = j;
    for (int j = tau_p; j < K; ++j) pilot[order[j]] = static_cast<int>(rng.below(tau_p));
  }
  return PilotAssignment::from_indices(std::move(pilot), tau_p);
}

GroupAssignment GroupAssignment::from_mask(const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask,
                                           const PilotAssignment& pa) {
  const int K = static_cast<int>(mask.rows());
  const int L = static_cast<int>(mask.cols());
  if (K != pa.num_ues()) throw ConfigError("mask", "row count must equal K");
  GroupAssignment ga;
  ga.is_strong = mask;
  ga.strong.assign(L, {});
  ga.weak.assign(L, {});
  ga.tau_s.assign(L, 0);
  ga.strong_pilots.assign(L, {});
  ga.strong_aps.assign(K, {});
  ga.weak_aps.assign(K, {});
  for (int l = 0; l < L; ++l) {
    std::vector<char> used(pa.tau_p, 0);
    for (int k = 0; k < K; ++k) {
      if (mask(k, l)) {
        ga.strong[l].push_back(k);
        ga.strong_aps[k].push_back(l);
        used[pa.pilot[k]] = 1;
      } else {
        ga.weak[l].push_back(k);
        ga.weak_aps[k].push_back(l);
      }
    }
    for (int i = 0; i < pa.tau_p; ++i)
      if (used[i]) ga.strong_pilots[l].push_back(i);
    ga.tau_s[l] = static_cast<int>(ga.strong_pilots[l].size());
    for (int k = 0; k < K; ++k)
      if (!mask(k, l) && used[pa.pilot[k]])
        throw ConfigError("mask", "strong set is not closed under co-pilot sets");
  }
  return ga;
}

GroupAssignment GroupAssignment::all_strong(const PilotAssignment& pa, int L) {
  return from_mask(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(pa.num_ues(), L, true), pa);
}

GroupAssignment GroupAssignment::all_weak(const PilotAssignment& pa, int L) {
  return from_mask(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(pa.num_ues(), L, false), pa);
}

int GroupAssignment::local_index(int pilot, int l) const {
  const auto& r = strong_pilots[l];
  const auto it = std::lower_bound(r.begin(), r.end(), pilot);
  return (it != r.end() && *it == pilot) ? static_cast<int>(it - r.begin()) : -1;
}

GroupAssignment group_ues(const NetworkRealization& net, const PilotAssignment& pa, double v_percent, int N) {
  if (!(v_percent > 0.0 && v_percent <= 100.0)) throw ConfigError("v_percent", "must lie in (0, 100]");
  const int K = net.num_ues();
  const int L = net.num_aps();
  if (K != pa.num_ues()) throw ConfigError("pilots", "assignment size must equal K");
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(K, L);
  mask.setConstant(false);

  std::vector<int> order(K);
  for (int l = 0; l < L; ++l) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return net.beta(a, l) > net.beta(b, l); });
    // Summing in sorted order makes the full prefix reach exactly 100%.
    double total = 0.0;
    for (int k : order) total += net.beta(k, l);
    const double target = v_percent / 100.0 * total;

    std::vector<char> pilot_on(pa.tau_p, 0);
    double acc = 0.0;
    for (int k : order) {
      acc += net.beta(k, l);
      pilot_on[pa.pilot[k]] = 1;
      if (acc >= target) break;
    }

    int tau_s = static_cast<int>(std::count(pilot_on.begin(), pilot_on.end(), 1));
    if (tau_s > N - 1) {
      std::vector<std::pair<double, int>> clusters;
      for (int i = 0; i < pa.tau_p; ++i) {
        if (!pilot_on[i]) continue;
        double s = 0.0;
        for (int k = 0; k < K; ++k)
          if (pa.pilot[k] == i) s += net.beta(k, l);
        clusters.emplace_back(s, i);
      }
      std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second > b.second;
      });
      for (const auto& c : clusters) {
        if (tau_s <= N - 1) break;
        pilot_on[c.second] = 0;
        --tau_s;
      }
    }
    for (int k = 0; k < K; ++k) mask(k, l) = pilot_on[pa.pilot[k]] != 0;
  }
  return GroupAssignment::from_mask(mask, pa);
}

}  // namespace cfmimo
