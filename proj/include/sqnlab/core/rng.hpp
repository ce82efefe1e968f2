#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace sqnlab {

/// SplitMix64 finalizer; used only to decorrelate seeds, never as the stream itself.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// 64-bit FNV-1a of a tag, for mixing names into seeds.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed for a named sub-purpose (e.g. "run:SDBFGS", 7) of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ fnv1a64(tag)) + splitmix64(index));
}

/**
 * Reproducible random stream identified by (master seed, stream index).
 *
 * The engine is a Mersenne Twister seeded from a SplitMix64 mix of the pair, so
 * different stream indices give unrelated sequences. Draw sequences are
 * reproducible within one build of this library; no cross-platform promise is
 * made for the floating-point distributions.
 *
 * Satisfies UniformRandomBitGenerator so it can feed standard distributions.
 * Move-only: a stream has exactly one owner.
 */
class SeededRng {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view algorithm = "mt19937_64/splitmix64";

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

  SeededRng(const SeededRng&) = delete;
  SeededRng& operator=(const SeededRng&) = delete;
  SeededRng(SeededRng&&) noexcept = default;
  SeededRng& operator=(SeededRng&&) noexcept = default;

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace sqnlab
