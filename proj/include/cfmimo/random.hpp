// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfmimo {

/// Derives an independent 64-bit seed from a base seed and a path of indices
/// (e.g. {purpose, drop, trial}) by chained SplitMix64 mixing.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Seed purposes. Each (purpose, index...) path names one substream.
enum class StreamPurpose : std::uint64_t {
  network = 1,
  pilots = 2,
  trial = 3,
  oracle = 4,
};

/// Reproducible random stream on top of std::mt19937_64.
///
/// Uniforms are built from the top 53 bits of each engine output and normals
/// from Box-Muller, so the produced sequence is fully specified by the standard
/// engine and does not depend on the library's distribution implementations.
/// One complex_normal() consumes exactly two engine outputs: the first gives
/// the radius, the second the angle; the real part takes the cosine branch.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t base, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(base, path)) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard real normal. Draws a fresh Box-Muller pair and discards the sine branch.
  double normal();
  /// Circularly-symmetric complex normal with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance = 1.0);

private:
  std::mt19937_64 engine_;
};

}  // namespace cfmimo
