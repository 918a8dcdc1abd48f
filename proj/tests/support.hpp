#pragma once

// Shared fixtures for the test binaries: seeded profile generators.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dnaplan/dna.hpp"

namespace dnaplan::testing {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// n-point grid {0, 1/(n-1), ..., 1} with i.i.d. U[0,1) values.
inline DnaProfile random_profile(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = uniform01(rng);
  return DnaProfile(TimeGrid::uniform(n, true), std::move(v), {{"seed", seed}});
}

/// C(t) = amp * expm1(rate * t) / expm1(rate): error shrinking toward t = 0.
inline DnaProfile exp_decay_profile(std::size_t n, double rate, double amp = 1.0, bool include_zero = false) {
  const TimeGrid g = TimeGrid::uniform(n, include_zero);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::expm1(rate * g[i]) / std::expm1(rate);
  return DnaProfile(g, std::move(v), {{"family", "exp-decay"}, {"rate", rate}});
}

/// Random member of the decaying family: random rate, amplitude and a mild
/// multiplicative jitter that keeps the curve increasing in t.
inline DnaProfile random_decaying_profile(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double rate = 1.0 + 6.0 * uniform01(rng);
  const double amp = 0.5 + 2.0 * uniform01(rng);
  const double power = 1.0 + 2.0 * uniform01(rng);
  const double mix = uniform01(rng);
  const TimeGrid g = TimeGrid::uniform(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = g[i];
    v[i] = amp * (mix * std::expm1(rate * t) / std::expm1(rate) + (1.0 - mix) * std::pow(t, power));
  }
  return DnaProfile(g, std::move(v), {{"family", "decaying"}, {"seed", seed}});
}

}  // namespace dnaplan::testing
