#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fairdyn {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Used for config hashes and seed derivation.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a root seed, a stage name and a
/// unit index. The derivation is a pure function, so work units may be
/// evaluated in any order and still see the same random stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t unit = 0) noexcept;

inline Rng make_rng(std::uint64_t root, std::string_view stage, std::uint64_t unit = 0) {
  return Rng(derive_seed(root, stage, unit));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, n) by rejection; n > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal draw (Marsaglia polar method).
double standard_normal(Rng& rng);

}  // namespace fairdyn
