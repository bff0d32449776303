#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "nsdf/types.hpp"

namespace nsdf {

// Counter-based generator with a fully documented algorithm so that streams
// can be reproduced in any language:
//
//   out(k) = mix64(seed + (k+1) * 0x9E3779B97F4A7C15)
//
// where mix64 is the SplitMix64 finalizer (Steele et al., "Fast splittable
// pseudorandom number generators"). Substreams are derived by folding a label
// and stream indices through the same mixer, which keeps draws independent of
// the order in which streams are consumed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), counter_(0) {}

  static uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  uint64_t next_u64() {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53 random bits.
  Real uniform() { return Real(next_u64() >> 11) * 0x1.0p-53; }

  Real uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection on the top 64-bit range.
  uint64_t uniform_index(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller; consumes exactly two draws per value so streams stay aligned
  // across implementations (no cached spare).
  Real gaussian() {
    Real u1 = uniform();
    Real u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec3 gaussian3(Real sigma) {
    return Vec3(sigma * gaussian(), sigma * gaussian(), sigma * gaussian());
  }

  // Fisher-Yates over indices 0..n-1.
  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) {
      const Index j = static_cast<Index>(uniform_index(uint64_t(i) + 1));
      std::swap(p[static_cast<size_t>(i)], p[static_cast<size_t>(j)]);
    }
    return p;
  }

  // k distinct indices from [0, n), in draw order.
  std::vector<Index> sample_without_replacement(Index n, Index k) {
    std::vector<Index> p = permutation(n);
    p.resize(static_cast<size_t>(k < n ? k : n));
    return p;
  }

  // Named substream: independent generator for (label, a, b).
  Rng stream(uint64_t label, uint64_t a = 0, uint64_t b = 0) const {
    uint64_t s = mix64(seed_ ^ mix64(label));
    s = mix64(s + a * 0x9E3779B97F4A7C15ULL);
    s = mix64(s + b * 0xD1B54A32D192ED03ULL);
    return Rng(s);
  }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  uint64_t counter_;
};

// Stable stream labels used across the pipeline.
namespace stream_label {
inline constexpr uint64_t kTrainSample = 0x7261696e73616d70ULL;
inline constexpr uint64_t kLatentInit = 0x6c6174696e697400ULL;
inline constexpr uint64_t kBatchShuffle = 0x73687566666c6500ULL;
inline constexpr uint64_t kValidation = 0x76616c6964617465ULL;
inline constexpr uint64_t kDecoderInit = 0x6465636f64657200ULL;
inline constexpr uint64_t kPhantom = 0x7068616e746f6d00ULL;
inline constexpr uint64_t kSubsample = 0x73756273616d706cULL;
inline constexpr uint64_t kInference = 0x696e666572656e63ULL;
inline constexpr uint64_t kMetrics = 0x6d65747269637300ULL;
}  // namespace stream_label

}  // namespace nsdf
