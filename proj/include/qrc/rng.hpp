#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace qrc {

using Rng = std::mt19937_64;

// Named sub-streams of one run seed. Each random consumer in a run draws from
// its own stream so that, e.g., enabling observation noise never changes the
// Hamiltonian that gets drawn.
enum class Stream : std::uint64_t {
  kHamiltonian = 1,
  kInputs = 2,
  kObservationNoise = 3,
  kTrainingNoise = 4,
  kInitialState = 5,
  kPerturbation = 6,
  kEsnWeights = 7,
};

// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable hash of (seed, parts...): h = mix64(seed); h = mix64(h ^ part) for each part.
// Used for per-cell and per-sample seed derivation; the rule is recorded in
// every summary.json so results can be regenerated outside this code base.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::span<const std::uint64_t> parts) noexcept {
  std::uint64_t h = mix64(seed);
  for (auto p : parts) h = mix64(h ^ p);
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) noexcept {
  return derive_seed(seed, std::span<const std::uint64_t>(parts.begin(), parts.size()));
}

inline std::uint64_t stream_seed(std::uint64_t run_seed, Stream s) noexcept {
  return derive_seed(run_seed, {static_cast<std::uint64_t>(s)});
}

inline Rng make_rng(std::uint64_t run_seed, Stream s) { return Rng(stream_seed(run_seed, s)); }

// Bit pattern of a double, for hashing grid coordinates. -0.0 hashes as 0.0.
constexpr std::uint64_t double_bits(double x) noexcept {
  return std::bit_cast<std::uint64_t>(x == 0.0 ? 0.0 : x);
}

}  // namespace qrc
