#pragma once

#include <cstdint>
#include <random>

namespace copulaeda {

//! Random stream used throughout the library. Every stochastic operation
//! takes one of these explicitly; nothing touches global state.
using Rng = std::mt19937_64;

//! SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

//! Seed for run `index` of a study started from `base_seed`. Independent of
//! scheduling, so parallel and sequential studies produce the same runs.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index)
{
  return mix64(mix64(base_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

//! Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng)
{
  // 53 random bits, offset by half an ulp so 0 is never produced.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng)
{
  return std::normal_distribution<double>{}(rng);
}

} // namespace copulaeda
