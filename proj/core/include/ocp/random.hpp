#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of a 64-bit key and a short sequence of integer words, so runs are
// replayable bit-exactly on any platform and lazily-evaluated fields (edge
// states, clock marks, trial variables) need no storage.

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace ocp {

__extension__ typedef unsigned __int128 uint128;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Domain tags keep the different random fields independent under one seed.
enum class Domain : std::uint64_t {
  edge = 0x6564676500000001ULL,
  recovery_mark = 0x7265636f00000002ULL,
  arrow_mark = 0x6172726f00000003ULL,
  sir_recovery = 0x7369725900000004ULL,
  sir_attempt = 0x7369725500000005ULL,
  walk = 0x77616c6b00000006ULL,
  seed_schedule = 0x7365656400000007ULL,
  probe = 0x70726f6200000008ULL,
};

/// Sequential keyed hash over 64-bit words. Signed coordinates are absorbed as
/// their two's-complement bit pattern, which is the fixed-width little-endian
/// encoding of the word on every supported platform.
class KeyedHash {
 public:
  constexpr KeyedHash(std::uint64_t key, Domain domain) noexcept
      : state_(mix64(key ^ static_cast<std::uint64_t>(domain))) {}

  constexpr KeyedHash& add(std::uint64_t word) noexcept {
    state_ = mix64(state_ * kGolden + word);
    return *this;
  }
  constexpr KeyedHash& add_signed(std::int64_t word) noexcept {
    return add(static_cast<std::uint64_t>(word));
  }
  KeyedHash& add_words(std::span<const std::int64_t> words) noexcept {
    for (std::int64_t w : words) add_signed(w);
    return *this;
  }

  constexpr std::uint64_t digest() const noexcept { return mix64(state_ ^ 0xD6E8FEB86659FD93ULL); }

 private:
  std::uint64_t state_;
};

/// splitmix64 stream; small, fast, and good enough for Monte Carlo.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

/// Uniform in [0, 1) with 53 random bits.
inline double to_unit(std::uint64_t u) noexcept {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

/// Inverse-CDF exponential with the given rate; finite for every input word.
inline double to_exponential(std::uint64_t u, double rate) noexcept {
  return -std::log1p(-to_unit(u)) / rate;
}

/// Index in [0, n) by multiply-high; bias is at most n / 2^64.
inline std::uint32_t to_index(std::uint64_t u, std::uint32_t n) noexcept {
  return static_cast<std::uint32_t>((static_cast<uint128>(u) * n) >> 64);
}

/// Threshold t such that "u < t" has probability p for a uniform 64-bit u.
inline std::uint64_t probability_threshold(double p) noexcept {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

/// Deterministic child seed for replica `index` of the stream `label`.
std::uint64_t seed_schedule(std::uint64_t master_seed, std::string_view label, std::uint64_t index) noexcept;

}  // namespace ocp
